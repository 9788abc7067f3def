#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "aeq/perm.hpp"

namespace aeq {

/// Size caps and validation intensities shared by the group constructors.
struct GroupLimits {
    std::size_t max_order = 20000;             // closure / product size cap
    std::size_t exhaustive_check_order = 256;  // exhaustive pair checks up to this order
    std::size_t sampled_checks = 1000;         // random pair checks above the cap
    std::uint64_t check_seed = 0x5eed5eedull;
};

/// A finite group realized as a closed set of permutations of one degree.
/// Element 0 is always the identity. Group axioms are verified at
/// construction: exhaustively for small orders, by seeded sampling above
/// limits.exhaustive_check_order.
class PermGroup {
public:
    PermGroup() = default;  // empty; fill via the named constructors

    static PermGroup trivial(std::size_t degree);

    /// Validates and takes ownership of a full element list. The identity is
    /// moved to index 0 if present elsewhere. Throws ValidationError on
    /// duplicates, degree mismatches, broken bijections, or closure failures.
    static PermGroup from_elements(std::vector<Perm> elements, const GroupLimits& limits = {});

    std::size_t degree() const { return degree_; }
    std::size_t order() const { return elements_.size(); }
    const std::vector<Perm>& elements() const { return elements_; }
    const Perm& element(std::size_t i) const { return elements_[i]; }

    std::optional<std::size_t> find(const Perm& p) const;
    std::size_t index_of(const Perm& p) const;  // throws ValidationError if absent

    /// Index of element(a) ∘ element(b)  (apply b first).
    std::size_t product_index(std::size_t a, std::size_t b) const;
    std::size_t inverse_index(std::size_t a) const;
    std::size_t element_order(std::size_t a) const;

    bool is_abelian() const;

private:
    void build_index();

    std::size_t degree_ = 0;
    std::vector<Perm> elements_;
    std::unordered_map<Perm, std::uint32_t, PermHash> index_;
};

/// Smallest closed group containing all generators (BFS over products).
/// Throws CapacityError once the closure exceeds limits.max_order.
PermGroup close_generators(const std::vector<Perm>& generators, const GroupLimits& limits = {});

/// Block-diagonal direct product: degree D1 + D2, order |G1|*|G2|.
/// Elements are ordered pairwise, flat index i1*|G2| + i2.
PermGroup direct_product(const PermGroup& g1, const PermGroup& g2, const GroupLimits& limits = {});

/// alpha[j][i] = index in g1 of alpha_{g2[j]}(g1[i]).
using AutomorphismTable = std::vector<std::vector<std::uint32_t>>;

/// Identity automorphism table for a group of the given order.
AutomorphismTable trivial_automorphism(std::size_t order_g2, std::size_t order_g1);

/// Semidirect product G1 x| G2 with multiplication
/// (a1,a2)(b1,b2) = (a1 * alpha_{a2}(b1), a2 * b2),
/// realized as a permutation group via the left regular representation on its
/// own element set (degree |G1|*|G2|, pair (i1,i2) at flat index i1*|G2|+i2).
/// alpha is validated: alpha(e) = id, every row an automorphism of g1, and
/// alpha a homomorphism G2 -> Aut(G1). Violations name the failing pair.
PermGroup semidirect_product(const PermGroup& g1, const PermGroup& g2,
                             const AutomorphismTable& alpha, const GroupLimits& limits = {});

/// psi[j][k] = index in g1 of the cocycle value psi(g2[j], g2[k]).
using CocycleTable = std::vector<std::vector<std::uint32_t>>;

struct CentralExtensionResult {
    PermGroup group;
    /// Whether (a1,e)*(e,a2) == (a1,a2) held for every pair. Fails exactly
    /// when psi(e, g2) != e for some g2.
    bool pair_product_matches = false;
    /// Whether psi(e,e) == e. When false, the set is still a group under the
    /// twisted multiplication but its identity is not (e,e).
    bool normalized = false;
};

/// Central extension of g2 by abelian g1 using the 2-cocycle psi:
/// (a1,a2)*(b1,b2) = (a1 * b1 * psi(a2,b2), a2 * b2), realized via the left
/// regular representation. The cocycle identity
/// psi(a, b*c) * psi(b, c) == psi(a, b) * psi(a*b, c) is checked for all
/// triples; a violation raises ValidationError naming the triple.
CentralExtensionResult central_extension(const PermGroup& g1, const PermGroup& g2,
                                         const CocycleTable& psi, const GroupLimits& limits = {});

}  // namespace aeq
