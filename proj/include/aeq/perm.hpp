#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aeq {

/// A permutation of {0, ..., D-1}, stored as its image table:
/// map[i] is the image of index i.
struct Perm {
    std::vector<std::uint32_t> map;

    Perm() = default;
    explicit Perm(std::vector<std::uint32_t> images) : map(std::move(images)) {}

    static Perm identity(std::size_t degree);

    std::size_t degree() const { return map.size(); }
    std::uint32_t operator()(std::uint32_t i) const { return map[i]; }
    bool is_identity() const;

    bool operator==(const Perm&) const = default;
};

/// True iff map is a bijection on {0, ..., D-1}.
bool is_bijection(const Perm& p);

/// Composition "apply b first, then a": result(i) = a(b(i)).
/// Throws ValidationError on degree mismatch.
Perm compose(const Perm& a, const Perm& b);

Perm inverse(const Perm& p);

/// Smallest k >= 1 with p^k = identity.
std::size_t perm_order(const Perm& p);

/// Permutation from one cycle over the given indices, e.g. cycle_perm(3, {0,1,2})
/// maps 0->1, 1->2, 2->0 and fixes everything else.
Perm cycle_perm(std::size_t degree, const std::vector<std::uint32_t>& cycle);

/// i -> (i + k) mod degree.
Perm shift_perm(std::size_t degree, std::size_t k = 1);

/// i -> degree - 1 - i.
Perm reversal_perm(std::size_t degree);

struct PermHash {
    std::size_t operator()(const Perm& p) const;
};

std::string to_string(const Perm& p);

}  // namespace aeq
