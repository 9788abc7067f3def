#include "aeq/group_action.hpp"

#include <random>

#include "aeq/errors.hpp"

namespace aeq {

namespace {

void check_pair(const PermGroup& g, const std::vector<Perm>& perms, std::size_t i, std::size_t j) {
    const std::size_t k = g.product_index(i, j);
    if (perms[k] != compose(perms[i], perms[j])) {
        throw ValidationError("action violates the homomorphism law at pair (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
    }
}

}  // namespace

GroupAction GroupAction::create(GroupPtr group, std::vector<Perm> perms,
                                const GroupLimits& limits, ActionCheck check) {
    if (!group) throw ValidationError("action needs a group");
    if (perms.size() != group->order()) {
        throw ValidationError("action needs exactly one permutation per group element");
    }
    const std::size_t domain = perms.empty() ? 0 : perms[0].degree();
    for (const Perm& p : perms) {
        if (p.degree() != domain) throw ValidationError("action permutations have mixed degrees");
        if (!is_bijection(p)) throw ValidationError("action permutation is not a bijection");
    }
    if (!perms[0].is_identity()) {
        throw ValidationError("action must map the identity element to the identity permutation");
    }

    const std::size_t n = group->order();
    switch (check) {
        case ActionCheck::Full:
            if (n <= limits.exhaustive_check_order) {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        check_pair(*group, perms, i, j);
                    }
                }
            } else {
                std::mt19937_64 rng(limits.check_seed);
                std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                for (std::size_t s = 0; s < limits.sampled_checks; ++s) {
                    check_pair(*group, perms, pick(rng), pick(rng));
                }
            }
            break;
        case ActionCheck::Spot: {
            std::mt19937_64 rng(limits.check_seed);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            const std::size_t samples = std::min<std::size_t>(32, n * n);
            for (std::size_t s = 0; s < samples; ++s) {
                check_pair(*group, perms, pick(rng), pick(rng));
            }
            break;
        }
        case ActionCheck::Skip:
            break;
    }

    GroupAction a;
    a.group_ = std::move(group);
    a.domain_size_ = domain;
    a.perms_ = std::move(perms);
    return a;
}

GroupAction GroupAction::natural(GroupPtr group) {
    std::vector<Perm> perms = group->elements();
    return create(std::move(group), std::move(perms), {}, ActionCheck::Skip);
}

GroupAction GroupAction::trivial(GroupPtr group, std::size_t domain_size) {
    std::vector<Perm> perms(group->order(), Perm::identity(domain_size));
    return create(std::move(group), std::move(perms), {}, ActionCheck::Skip);
}

GroupAction GroupAction::regular_blocks(GroupPtr group, std::size_t width) {
    const std::size_t n = group->order();
    if (n == 0 || width % n != 0) {
        throw ConfigError("regular-block action needs the group order (" + std::to_string(n) +
                          ") to divide the width (" + std::to_string(width) + ")");
    }
    const std::size_t blocks = width / n;
    std::vector<Perm> perms;
    perms.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
        Perm p;
        p.map.resize(width);
        for (std::size_t x = 0; x < n; ++x) {
            const std::uint32_t ax = static_cast<std::uint32_t>(group->product_index(a, x));
            for (std::size_t b = 0; b < blocks; ++b) {
                p.map[b * n + x] = static_cast<std::uint32_t>(b * n) + ax;
            }
        }
        perms.push_back(std::move(p));
    }
    return create(std::move(group), std::move(perms), {}, ActionCheck::Spot);
}

}  // namespace aeq
