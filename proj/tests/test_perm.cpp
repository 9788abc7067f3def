#include <doctest.h>

#include <random>

#include "aeq/errors.hpp"
#include "aeq/perm.hpp"
#include "helpers.hpp"

using namespace aeq;
using aeq::testing::perm_of;

TEST_CASE("compose applies the right factor first") {
    const Perm p = perm_of({1, 2, 0});
    CHECK(compose(Perm::identity(3), p) == p);
    CHECK(compose(p, Perm::identity(3)) == p);
    CHECK(compose(p, p) == perm_of({2, 0, 1}));
}

TEST_CASE("compose rejects degree mismatch") {
    CHECK_THROWS_AS(compose(Perm::identity(3), Perm::identity(4)), ValidationError);
}

TEST_CASE("inverse composes to the identity on random permutations") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::uint32_t> images(50);
        for (std::size_t i = 0; i < images.size(); ++i) images[i] = static_cast<std::uint32_t>(i);
        std::shuffle(images.begin(), images.end(), rng);
        const Perm p(images);
        CHECK(compose(p, inverse(p)).is_identity());
        CHECK(compose(inverse(p), p).is_identity());
    }
}

TEST_CASE("bijection detection") {
    CHECK(is_bijection(perm_of({2, 0, 1})));
    CHECK_FALSE(is_bijection(perm_of({0, 0, 1})));
    CHECK_FALSE(is_bijection(perm_of({0, 3, 1})));
}

TEST_CASE("perm helpers") {
    CHECK(shift_perm(4, 1) == perm_of({1, 2, 3, 0}));
    CHECK(reversal_perm(3) == perm_of({2, 1, 0}));
    CHECK(cycle_perm(4, {0, 1, 2}) == perm_of({1, 2, 0, 3}));
    CHECK(perm_order(shift_perm(6, 2)) == 3);
    CHECK(perm_order(Perm::identity(5)) == 1);
}
