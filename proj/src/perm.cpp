#include "aeq/perm.hpp"

#include <numeric>

#include "aeq/errors.hpp"

namespace aeq {

Perm Perm::identity(std::size_t degree) {
    Perm p;
    p.map.resize(degree);
    std::iota(p.map.begin(), p.map.end(), 0u);
    return p;
}

bool Perm::is_identity() const {
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] != i) return false;
    }
    return true;
}

bool is_bijection(const Perm& p) {
    std::vector<bool> seen(p.degree(), false);
    for (std::uint32_t v : p.map) {
        if (v >= p.degree() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

Perm compose(const Perm& a, const Perm& b) {
    if (a.degree() != b.degree()) {
        throw ValidationError("compose: degree mismatch (" + std::to_string(a.degree()) +
                              " vs " + std::to_string(b.degree()) + ")");
    }
    Perm r;
    r.map.resize(a.degree());
    for (std::size_t i = 0; i < a.degree(); ++i) {
        r.map[i] = a.map[b.map[i]];
    }
    return r;
}

Perm inverse(const Perm& p) {
    Perm r;
    r.map.resize(p.degree());
    for (std::size_t i = 0; i < p.degree(); ++i) {
        r.map[p.map[i]] = static_cast<std::uint32_t>(i);
    }
    return r;
}

std::size_t perm_order(const Perm& p) {
    Perm q = p;
    std::size_t k = 1;
    while (!q.is_identity()) {
        q = compose(p, q);
        ++k;
    }
    return k;
}

Perm cycle_perm(std::size_t degree, const std::vector<std::uint32_t>& cycle) {
    Perm p = Perm::identity(degree);
    if (cycle.empty()) return p;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        std::uint32_t from = cycle[i];
        std::uint32_t to = cycle[(i + 1) % cycle.size()];
        if (from >= degree || to >= degree) {
            throw ValidationError("cycle_perm: index out of range");
        }
        p.map[from] = to;
    }
    if (!is_bijection(p)) {
        throw ValidationError("cycle_perm: repeated index in cycle");
    }
    return p;
}

Perm shift_perm(std::size_t degree, std::size_t k) {
    Perm p;
    p.map.resize(degree);
    for (std::size_t i = 0; i < degree; ++i) {
        p.map[i] = static_cast<std::uint32_t>((i + k) % degree);
    }
    return p;
}

Perm reversal_perm(std::size_t degree) {
    Perm p;
    p.map.resize(degree);
    for (std::size_t i = 0; i < degree; ++i) {
        p.map[i] = static_cast<std::uint32_t>(degree - 1 - i);
    }
    return p;
}

std::size_t PermHash::operator()(const Perm& p) const {
    // FNV-1a over the image table.
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint32_t v : p.map) {
        h ^= v;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

std::string to_string(const Perm& p) {
    std::string s;
    for (std::size_t i = 0; i < p.degree(); ++i) {
        if (i) s += ' ';
        s += std::to_string(p.map[i]);
    }
    return s;
}

}  // namespace aeq
