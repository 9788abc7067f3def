#pragma once

#include <memory>
#include <vector>

#include "aeq/perm.hpp"
#include "aeq/perm_group.hpp"

namespace aeq {

using GroupPtr = std::shared_ptr<const PermGroup>;

/// How hard to verify the homomorphism law when constructing an action.
enum class ActionCheck {
    Full,  // exhaustive pairs up to limits.exhaustive_check_order, sampled above
    Spot,  // a few seeded pairs; for actions derived from validated ones
    Skip,
};

/// A homomorphism from a PermGroup into permutations of a target index
/// domain: perms[i] is the image of group element i. Immutable once built.
class GroupAction {
public:
    /// Validates perm(identity) == identity and the homomorphism law
    /// perm(g*h) == perm(g) ∘ perm(h) per the requested check level.
    static GroupAction create(GroupPtr group, std::vector<Perm> perms,
                              const GroupLimits& limits = {}, ActionCheck check = ActionCheck::Full);

    /// Each element acting by itself; domain = group degree.
    static GroupAction natural(GroupPtr group);

    /// Every element fixed on a domain of the given size.
    static GroupAction trivial(GroupPtr group, std::size_t domain_size);

    /// The domain split into width/|G| blocks of size |G|, each permuted by
    /// left multiplication on the element indices. Requires |G| | width.
    static GroupAction regular_blocks(GroupPtr group, std::size_t width);

    const PermGroup& group() const { return *group_; }
    GroupPtr group_ptr() const { return group_; }
    std::size_t domain_size() const { return domain_size_; }
    const Perm& perm(std::size_t element_index) const { return perms_[element_index]; }
    const std::vector<Perm>& perms() const { return perms_; }

private:
    GroupAction() = default;

    GroupPtr group_;
    std::size_t domain_size_ = 0;
    std::vector<Perm> perms_;
};

/// Applies one action permutation to a vector: out[perm(i)] = x[i].
template <typename T>
std::vector<T> apply_perm(const Perm& p, const std::vector<T>& x) {
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[p.map[i]] = x[i];
    }
    return out;
}

}  // namespace aeq
