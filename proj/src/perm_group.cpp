#include "aeq/perm_group.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "aeq/errors.hpp"

namespace aeq {

namespace {

void check_group_axioms(const std::vector<Perm>& elements,
                        const std::unordered_map<Perm, std::uint32_t, PermHash>& index,
                        const GroupLimits& limits) {
    const std::size_t n = elements.size();
    auto contains = [&](const Perm& p) { return index.find(p) != index.end(); };

    for (std::size_t i = 0; i < n; ++i) {
        if (!contains(inverse(elements[i]))) {
            throw ValidationError("group not closed under inverse at element " + std::to_string(i));
        }
    }

    if (n <= limits.exhaustive_check_order) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!contains(compose(elements[i], elements[j]))) {
                    throw ValidationError("group not closed under composition at pair (" +
                                          std::to_string(i) + ", " + std::to_string(j) + ")");
                }
            }
        }
    } else {
        std::mt19937_64 rng(limits.check_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (std::size_t s = 0; s < limits.sampled_checks; ++s) {
            std::size_t i = pick(rng), j = pick(rng);
            if (!contains(compose(elements[i], elements[j]))) {
                throw ValidationError("group not closed under composition at sampled pair (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
            }
        }
    }
}

}  // namespace

PermGroup PermGroup::trivial(std::size_t degree) {
    PermGroup g;
    g.degree_ = degree;
    g.elements_.push_back(Perm::identity(degree));
    g.build_index();
    return g;
}

PermGroup PermGroup::from_elements(std::vector<Perm> elements, const GroupLimits& limits) {
    if (elements.empty()) {
        throw ValidationError("group needs at least the identity element");
    }
    const std::size_t degree = elements[0].degree();
    for (std::size_t i = 0; i < elements.size(); ++i) {
        if (elements[i].degree() != degree) {
            throw ValidationError("element " + std::to_string(i) + " has mismatched degree");
        }
        if (!is_bijection(elements[i])) {
            throw ValidationError("element " + std::to_string(i) + " is not a bijection");
        }
    }

    // Identity first.
    auto id = std::find_if(elements.begin(), elements.end(),
                           [](const Perm& p) { return p.is_identity(); });
    if (id == elements.end()) {
        throw ValidationError("group does not contain the identity");
    }
    std::rotate(elements.begin(), id, id + 1);

    PermGroup g;
    g.degree_ = degree;
    g.elements_ = std::move(elements);
    g.build_index();
    if (g.index_.size() != g.elements_.size()) {
        throw ValidationError("element list contains duplicates");
    }
    check_group_axioms(g.elements_, g.index_, limits);
    return g;
}

void PermGroup::build_index() {
    index_.clear();
    index_.reserve(elements_.size());
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        index_.emplace(elements_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::size_t> PermGroup::find(const Perm& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t PermGroup::index_of(const Perm& p) const {
    auto i = find(p);
    if (!i) throw ValidationError("permutation is not a group element");
    return *i;
}

std::size_t PermGroup::product_index(std::size_t a, std::size_t b) const {
    return index_of(compose(elements_[a], elements_[b]));
}

std::size_t PermGroup::inverse_index(std::size_t a) const {
    return index_of(inverse(elements_[a]));
}

std::size_t PermGroup::element_order(std::size_t a) const {
    return perm_order(elements_[a]);
}

bool PermGroup::is_abelian() const {
    for (std::size_t i = 1; i < order(); ++i) {
        for (std::size_t j = i + 1; j < order(); ++j) {
            if (compose(elements_[i], elements_[j]) != compose(elements_[j], elements_[i])) {
                return false;
            }
        }
    }
    return true;
}

PermGroup close_generators(const std::vector<Perm>& generators, const GroupLimits& limits) {
    if (generators.empty()) {
        throw ValidationError("close_generators needs at least one generator");
    }
    const std::size_t degree = generators[0].degree();
    for (const Perm& g : generators) {
        if (g.degree() != degree) {
            throw ValidationError("generators have mismatched degrees");
        }
        if (!is_bijection(g)) {
            throw ValidationError("generator is not a bijection");
        }
    }

    std::unordered_map<Perm, std::uint32_t, PermHash> seen;
    std::vector<Perm> elements;
    std::deque<std::size_t> todo;

    auto add = [&](Perm p) -> bool {
        auto [it, inserted] = seen.emplace(std::move(p), static_cast<std::uint32_t>(elements.size()));
        if (!inserted) return false;
        if (elements.size() >= limits.max_order) {
            throw CapacityError("group too large: closure exceeds cap of " +
                                std::to_string(limits.max_order) + " elements");
        }
        elements.push_back(it->first);
        todo.push_back(elements.size() - 1);
        return true;
    };

    add(Perm::identity(degree));
    for (const Perm& g : generators) add(g);

    while (!todo.empty()) {
        const Perm current = elements[todo.front()];
        todo.pop_front();
        for (const Perm& g : generators) {
            add(compose(current, g));
        }
    }

    return PermGroup::from_elements(std::move(elements), limits);
}

PermGroup direct_product(const PermGroup& g1, const PermGroup& g2, const GroupLimits& limits) {
    const std::size_t n = g1.order() * g2.order();
    if (n > limits.max_order) {
        throw CapacityError("group too large: direct product order " + std::to_string(n) +
                            " exceeds cap of " + std::to_string(limits.max_order));
    }
    const std::size_t d1 = g1.degree(), d2 = g2.degree();
    std::vector<Perm> elements;
    elements.reserve(n);
    for (std::size_t i = 0; i < g1.order(); ++i) {
        for (std::size_t j = 0; j < g2.order(); ++j) {
            Perm p;
            p.map.resize(d1 + d2);
            for (std::size_t k = 0; k < d1; ++k) p.map[k] = g1.element(i).map[k];
            for (std::size_t k = 0; k < d2; ++k) {
                p.map[d1 + k] = static_cast<std::uint32_t>(d1) + g2.element(j).map[k];
            }
            elements.push_back(std::move(p));
        }
    }
    return PermGroup::from_elements(std::move(elements), limits);
}

AutomorphismTable trivial_automorphism(std::size_t order_g2, std::size_t order_g1) {
    std::vector<std::uint32_t> row(order_g1);
    for (std::size_t i = 0; i < order_g1; ++i) row[i] = static_cast<std::uint32_t>(i);
    return AutomorphismTable(order_g2, row);
}

namespace {

/// Left regular representation of an abstract multiplication table mul(a,b),
/// reordered so the identity sits at index 0, then validated as a PermGroup.
template <typename Mul>
PermGroup regular_representation(std::size_t n, Mul mul, const GroupLimits& limits,
                                 std::size_t identity_index) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::swap(order[0], order[identity_index]);

    std::vector<std::size_t> pos(n);  // abstract index -> reordered index
    for (std::size_t i = 0; i < n; ++i) pos[order[i]] = i;

    std::vector<Perm> elements;
    elements.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Perm p;
        p.map.resize(n);
        for (std::size_t x = 0; x < n; ++x) {
            p.map[x] = static_cast<std::uint32_t>(pos[mul(order[i], order[x])]);
        }
        elements.push_back(std::move(p));
    }
    return PermGroup::from_elements(std::move(elements), limits);
}

void validate_automorphism_table(const PermGroup& g1, const PermGroup& g2,
                                 const AutomorphismTable& alpha) {
    if (alpha.size() != g2.order()) {
        throw ValidationError("alpha table must have one row per element of the acting group");
    }
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j].size() != g1.order()) {
            throw ValidationError("alpha row " + std::to_string(j) + " has wrong length");
        }
        std::vector<bool> hit(g1.order(), false);
        for (std::uint32_t v : alpha[j]) {
            if (v >= g1.order() || hit[v]) {
                throw ValidationError("alpha row " + std::to_string(j) +
                                      " is not a bijection on the base group");
            }
            hit[v] = true;
        }
    }
    for (std::size_t i = 0; i < g1.order(); ++i) {
        if (alpha[0][i] != i) {
            throw ValidationError("alpha at the identity must be the identity automorphism");
        }
    }
    // Each row preserves the multiplication table of g1.
    for (std::size_t j = 0; j < g2.order(); ++j) {
        for (std::size_t a = 0; a < g1.order(); ++a) {
            for (std::size_t b = 0; b < g1.order(); ++b) {
                std::size_t lhs = alpha[j][g1.product_index(a, b)];
                std::size_t rhs = g1.product_index(alpha[j][a], alpha[j][b]);
                if (lhs != rhs) {
                    throw ValidationError("alpha(" + std::to_string(j) +
                                          ") is not an automorphism: fails at pair (" +
                                          std::to_string(a) + ", " + std::to_string(b) + ")");
                }
            }
        }
    }
    // alpha itself is a homomorphism G2 -> Aut(G1).
    for (std::size_t j = 0; j < g2.order(); ++j) {
        for (std::size_t k = 0; k < g2.order(); ++k) {
            const std::size_t jk = g2.product_index(j, k);
            for (std::size_t x = 0; x < g1.order(); ++x) {
                if (alpha[jk][x] != alpha[j][alpha[k][x]]) {
                    throw ValidationError("alpha is not a homomorphism: fails at pair (" +
                                          std::to_string(j) + ", " + std::to_string(k) + ")");
                }
            }
        }
    }
}

}  // namespace

PermGroup semidirect_product(const PermGroup& g1, const PermGroup& g2,
                             const AutomorphismTable& alpha, const GroupLimits& limits) {
    const std::size_t n = g1.order() * g2.order();
    if (n > limits.max_order) {
        throw CapacityError("group too large: semidirect product order " + std::to_string(n) +
                            " exceeds cap of " + std::to_string(limits.max_order));
    }
    validate_automorphism_table(g1, g2, alpha);

    const std::size_t n2 = g2.order();
    auto mul = [&](std::size_t a, std::size_t b) {
        const std::size_t a1 = a / n2, a2 = a % n2;
        const std::size_t b1 = b / n2, b2 = b % n2;
        const std::size_t c1 = g1.product_index(a1, alpha[a2][b1]);
        const std::size_t c2 = g2.product_index(a2, b2);
        return c1 * n2 + c2;
    };
    return regular_representation(n, mul, limits, /*identity_index=*/0);
}

CentralExtensionResult central_extension(const PermGroup& g1, const PermGroup& g2,
                                         const CocycleTable& psi, const GroupLimits& limits) {
    if (!g1.is_abelian()) {
        throw ValidationError("central extension requires an abelian base group");
    }
    const std::size_t n1 = g1.order(), n2 = g2.order();
    if (psi.size() != n2) {
        throw ValidationError("cocycle table must be |G2| x |G2|");
    }
    for (const auto& row : psi) {
        if (row.size() != n2) {
            throw ValidationError("cocycle table must be |G2| x |G2|");
        }
        for (std::uint32_t v : row) {
            if (v >= n1) throw ValidationError("cocycle value out of range");
        }
    }
    // psi(a, b*c) * psi(b, c) == psi(a, b) * psi(a*b, c) for all triples.
    for (std::size_t a = 0; a < n2; ++a) {
        for (std::size_t b = 0; b < n2; ++b) {
            for (std::size_t c = 0; c < n2; ++c) {
                std::size_t lhs = g1.product_index(psi[a][g2.product_index(b, c)], psi[b][c]);
                std::size_t rhs = g1.product_index(psi[a][b], psi[g2.product_index(a, b)][c]);
                if (lhs != rhs) {
                    throw ValidationError("cocycle identity violated at triple (" +
                                          std::to_string(a) + ", " + std::to_string(b) + ", " +
                                          std::to_string(c) + ")");
                }
            }
        }
    }

    const std::size_t n = n1 * n2;
    if (n > limits.max_order) {
        throw CapacityError("group too large: central extension order " + std::to_string(n) +
                            " exceeds cap of " + std::to_string(limits.max_order));
    }

    auto mul = [&](std::size_t a, std::size_t b) {
        const std::size_t a1 = a / n2, a2 = a % n2;
        const std::size_t b1 = b / n2, b2 = b % n2;
        const std::size_t c1 = g1.product_index(g1.product_index(a1, b1), psi[a2][b2]);
        const std::size_t c2 = g2.product_index(a2, b2);
        return c1 * n2 + c2;
    };

    CentralExtensionResult result;
    result.normalized = (psi[0][0] == 0);
    // (a1, e) * (e, a2) = (a1 * psi(e, a2), a2); matches (a1, a2) iff
    // psi(e, a2) = e for every a2.
    result.pair_product_matches = true;
    for (std::size_t a1 = 0; a1 < n1 && result.pair_product_matches; ++a1) {
        for (std::size_t a2 = 0; a2 < n2; ++a2) {
            if (mul(a1 * n2 + 0, 0 * n2 + a2) != a1 * n2 + a2) {
                result.pair_product_matches = false;
                break;
            }
        }
    }

    // Locate the identity of the twisted multiplication; with a normalized
    // cocycle it is (e, e), otherwise it sits elsewhere in the pair set.
    std::size_t identity_index = n;
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = true;
        for (std::size_t x = 0; x < n && ok; ++x) {
            ok = (mul(i, x) == x) && (mul(x, i) == x);
        }
        if (ok) {
            identity_index = i;
            break;
        }
    }
    if (identity_index == n) {
        throw ValidationError("cocycle admits no identity element");
    }

    result.group = regular_representation(n, mul, limits, identity_index);
    return result;
}

}  // namespace aeq
