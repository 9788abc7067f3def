#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "aeq/errors.hpp"
#include "aeq/orbits.hpp"
#include "aeq/perm.hpp"
#include "aeq/perm_group.hpp"

namespace aeq::testing {

inline Perm perm_of(std::initializer_list<std::uint32_t> images) {
    return Perm(std::vector<std::uint32_t>(images));
}

/// Independent brute-force orbit enumeration: repeatedly grow the orbit of
/// the first unassigned index by applying all elements until a fixed point.
/// Used as the oracle the BFS/stamping implementations are checked against.
inline OrbitPartition brute_force_orbits(std::size_t domain, const std::vector<Perm>& elements) {
    std::vector<std::uint32_t> ids(domain, 0xffffffffu);
    std::uint32_t next = 0;
    for (std::size_t start = 0; start < domain; ++start) {
        if (ids[start] != 0xffffffffu) continue;
        const std::uint32_t c = next++;
        std::vector<std::size_t> members{start};
        ids[start] = c;
        for (std::size_t k = 0; k < members.size(); ++k) {
            for (const Perm& p : elements) {
                const std::uint32_t img = p.map[members[k]];
                if (ids[img] == 0xffffffffu) {
                    ids[img] = c;
                    members.push_back(img);
                }
            }
        }
    }
    return OrbitPartition::canonicalize(ids);
}

/// Z3 shift and order-2 reversal on {0,1,2}: together they generate the
/// order-6 symmetric group on three points.
inline std::pair<Perm, Perm> s3_generators() {
    return {shift_perm(3, 1), reversal_perm(3)};
}

/// Random layer instance whose component groups are drawn from structured
/// generator families so closures stay small. Deterministic per seed.
struct RandomInstance {
    LayerShape shape;
    std::vector<PairedGroup> components;
};

inline Perm random_involution(std::size_t degree, std::mt19937_64& rng, std::size_t max_swaps = 3) {
    Perm p = Perm::identity(degree);
    std::uniform_int_distribution<std::size_t> pick(0, degree - 1);
    std::uniform_int_distribution<std::size_t> nswaps(1, max_swaps);
    const std::size_t swaps = nswaps(rng);
    for (std::size_t s = 0; s < swaps; ++s) {
        const std::size_t a = pick(rng), b = pick(rng);
        if (a == b || p.map[a] != a || p.map[b] != b) continue;
        p.map[a] = static_cast<std::uint32_t>(b);
        p.map[b] = static_cast<std::uint32_t>(a);
    }
    return p;
}

inline Perm random_structured_perm(std::size_t degree, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 3);
    switch (kind(rng)) {
        case 0: {
            std::uniform_int_distribution<std::size_t> k(1, degree - 1);
            return shift_perm(degree, k(rng));
        }
        case 1:
            return reversal_perm(degree);
        case 2:
            return random_involution(degree, rng);
        default: {
            // shift conjugated by reversal
            std::uniform_int_distribution<std::size_t> k(1, degree - 1);
            const Perm r = reversal_perm(degree);
            return compose(r, compose(shift_perm(degree, k(rng)), r));
        }
    }
}

inline RandomInstance random_instance(std::uint64_t seed, std::size_t max_side = 16,
                                      std::size_t max_groups = 3,
                                      std::size_t closure_cap = 2000) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> side(2, max_side);
    std::uniform_int_distribution<std::size_t> ngroups(1, max_groups);

    for (int attempt = 0; attempt < 64; ++attempt) {
        RandomInstance inst;
        inst.shape = LayerShape::of(side(rng), side(rng));
        const std::size_t k = ngroups(rng);
        bool ok = true;
        GroupLimits component_limits;
        component_limits.max_order = 256;
        try {
            for (std::size_t g = 0; g < k; ++g) {
                std::vector<std::pair<Perm, Perm>> gens;
                std::uniform_int_distribution<std::size_t> ngens(1, 2);
                const std::size_t n = ngens(rng);
                for (std::size_t i = 0; i < n; ++i) {
                    gens.emplace_back(random_structured_perm(inst.shape.n_in, rng),
                                      random_structured_perm(inst.shape.n_out, rng));
                }
                inst.components.push_back(
                    close_paired(gens, inst.shape.n_in, inst.shape.n_out, component_limits));
            }
            // The instance is only usable if the closure of all edge actions
            // stays under the cap; probe it the same way the oracle will.
            std::vector<Perm> edge_gens;
            for (const PairedGroup& c : inst.components) {
                EdgeAction ea = build_edge_action(inst.shape, c.in, c.out);
                for (const Perm& p : ea.edge_perms()) edge_gens.push_back(p);
            }
            GroupLimits closure_limits;
            closure_limits.max_order = closure_cap;
            close_generators(edge_gens, closure_limits);
        } catch (const CapacityError&) {
            ok = false;
        }
        if (ok) return inst;
    }
    throw std::runtime_error("could not build a random instance under the caps");
}

inline std::filesystem::path data_dir() {
    if (const char* env = std::getenv("AEQ_DATA_DIR")) return env;
    return std::filesystem::path("data");
}

}  // namespace aeq::testing
