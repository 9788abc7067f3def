#include <doctest.h>

#include "aeq/errors.hpp"
#include "aeq/perm_group.hpp"
#include "helpers.hpp"

using namespace aeq;
using aeq::testing::perm_of;

namespace {

PermGroup cyclic(std::size_t n) { return close_generators({shift_perm(n, 1)}); }

bool multiplication_commutes(const PermGroup& g) {
    for (std::size_t i = 0; i < g.order(); ++i) {
        for (std::size_t j = 0; j < g.order(); ++j) {
            if (g.product_index(i, j) != g.product_index(j, i)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("close_generators builds small cyclic and symmetric groups") {
    CHECK(close_generators({cycle_perm(3, {0, 1, 2})}).order() == 3);

    // 3-cycle plus a transposition generate all six permutations of {0,1,2}.
    const PermGroup s3 = close_generators({cycle_perm(3, {0, 1, 2}), cycle_perm(3, {1, 2})});
    CHECK(s3.order() == 6);

    const PermGroup v4 = close_generators({cycle_perm(4, {0, 1}), cycle_perm(4, {2, 3})});
    CHECK(v4.order() == 4);
}

TEST_CASE("close_generators is idempotent and caps closure size") {
    const PermGroup s3 = close_generators({cycle_perm(3, {0, 1, 2}), cycle_perm(3, {1, 2})});
    CHECK(close_generators(s3.elements()).order() == s3.order());

    GroupLimits tight;
    tight.max_order = 100;
    CHECK_THROWS_AS(close_generators({shift_perm(784, 1)}, tight), CapacityError);
}

TEST_CASE("group element lookup and orders") {
    const PermGroup z4 = cyclic(4);
    CHECK(z4.order() == 4);
    CHECK(z4.element(0).is_identity());
    CHECK(z4.index_of(shift_perm(4, 2)) < 4);
    CHECK(z4.element_order(z4.index_of(shift_perm(4, 1))) == 4);
    CHECK(z4.element_order(z4.index_of(shift_perm(4, 2))) == 2);
    CHECK(z4.is_abelian());
    CHECK_FALSE(z4.find(perm_of({1, 0, 2, 3})).has_value());
}

TEST_CASE("from_elements validates closure") {
    // {id, (01)} is a group; {id, (012)} is not closed.
    CHECK_NOTHROW(PermGroup::from_elements({Perm::identity(3), cycle_perm(3, {0, 1})}));
    CHECK_THROWS_AS(PermGroup::from_elements({Perm::identity(3), cycle_perm(3, {0, 1, 2})}),
                    ValidationError);
    CHECK_THROWS_AS(PermGroup::from_elements({cycle_perm(3, {0, 1})}), ValidationError);
}

TEST_CASE("direct product orders, commutativity, and element orders") {
    const PermGroup z2 = cyclic(2);
    const PermGroup z3 = cyclic(3);

    const PermGroup z2xz3 = direct_product(z2, z3);
    CHECK(z2xz3.order() == 6);
    CHECK(z2xz3.degree() == 5);
    CHECK(multiplication_commutes(z2xz3));

    const PermGroup z2xz2 = direct_product(z2, z2);
    CHECK(z2xz2.order() == 4);
    for (std::size_t i = 1; i < z2xz2.order(); ++i) {
        CHECK(z2xz2.element_order(i) == 2);
    }

    const PermGroup gxe = direct_product(z3, PermGroup::trivial(1));
    CHECK(gxe.order() == 3);
}

TEST_CASE("direct product is symmetric up to the coordinate-swap relabeling") {
    const PermGroup a = cyclic(2);
    const PermGroup b = cyclic(3);
    const PermGroup ab = direct_product(a, b);
    const PermGroup ba = direct_product(b, a);
    // (i, j) in a x b corresponds to (j, i) in b x a.
    auto swap_index = [&](std::size_t flat) {
        const std::size_t i = flat / b.order(), j = flat % b.order();
        return j * a.order() + i;
    };
    for (std::size_t x = 0; x < ab.order(); ++x) {
        for (std::size_t y = 0; y < ab.order(); ++y) {
            CHECK(swap_index(ab.product_index(x, y)) ==
                  ba.product_index(swap_index(x), swap_index(y)));
        }
    }
}

TEST_CASE("semidirect product with the inversion automorphism gives S3") {
    const PermGroup z3 = cyclic(3);
    const PermGroup z2 = cyclic(2);

    // Inversion of Z3: index of the inverse of each element.
    AutomorphismTable alpha(2);
    alpha[0] = {0, 1, 2};
    alpha[1].resize(3);
    for (std::size_t i = 0; i < 3; ++i) {
        alpha[1][i] = static_cast<std::uint32_t>(z3.inverse_index(i));
    }

    const PermGroup s3 = semidirect_product(z3, z2, alpha);
    CHECK(s3.order() == 6);
    CHECK_FALSE(s3.is_abelian());
    std::size_t order2 = 0;
    for (std::size_t i = 1; i < s3.order(); ++i) {
        if (s3.element_order(i) == 2) ++order2;
    }
    CHECK(order2 == 3);
}

TEST_CASE("semidirect product with trivial alpha matches the direct product table") {
    const PermGroup z3 = cyclic(3);
    const PermGroup z2 = cyclic(2);

    const PermGroup twisted = semidirect_product(z3, z2, trivial_automorphism(2, 3));
    CHECK(twisted.order() == 6);
    CHECK(multiplication_commutes(twisted));  // Z3 x Z2 is Z6

    // Identical multiplication tables at matching flat pair indices.
    const PermGroup direct = direct_product(z3, z2);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(twisted.product_index(i, j) == direct.product_index(i, j));
        }
    }
}

TEST_CASE("semidirect product over a trivial acting group is the regular representation") {
    const PermGroup z3 = cyclic(3);
    const PermGroup g = semidirect_product(z3, PermGroup::trivial(1), trivial_automorphism(1, 3));
    CHECK(g.order() == 3);
    CHECK(g.degree() == 3);
    CHECK(multiplication_commutes(g));
}

TEST_CASE("semidirect product rejects invalid alpha tables") {
    const PermGroup z3 = cyclic(3);
    const PermGroup z2 = cyclic(2);

    AutomorphismTable not_identity_at_e(2, {1, 2, 0});
    CHECK_THROWS_AS(semidirect_product(z3, z2, not_identity_at_e), ValidationError);

    // Swapping identity with a generator is a bijection but no automorphism.
    AutomorphismTable broken(2);
    broken[0] = {0, 1, 2};
    broken[1] = {1, 0, 2};
    CHECK_THROWS_AS(semidirect_product(z3, z2, broken), ValidationError);

    // Valid rows that fail the homomorphism law: alpha(g) = inversion on Z3
    // only at the generator of Z4, nowhere else.
    const PermGroup z4 = cyclic(4);
    AutomorphismTable nonhom(4, {0, 1, 2});
    nonhom[1] = {0, 2, 1};
    CHECK_THROWS_AS(semidirect_product(z3, z4, nonhom), ValidationError);
}

TEST_CASE("central extension of Z2 by Z2 with the carry cocycle is Z4") {
    const PermGroup z2 = cyclic(2);

    // psi(a, b) = carry bit of a + b: nonzero only at (1, 1).
    CocycleTable carry{{0, 0}, {0, 1}};
    const CentralExtensionResult r = central_extension(z2, z2, carry);
    CHECK(r.group.order() == 4);
    CHECK(r.normalized);
    CHECK(r.pair_product_matches);
    bool has_order4 = false;
    for (std::size_t i = 0; i < 4; ++i) {
        if (r.group.element_order(i) == 4) has_order4 = true;
    }
    CHECK(has_order4);
}

TEST_CASE("central extension with the trivial cocycle is Z2 x Z2") {
    const PermGroup z2 = cyclic(2);
    CocycleTable trivial{{0, 0}, {0, 0}};
    const CentralExtensionResult r = central_extension(z2, z2, trivial);
    CHECK(r.group.order() == 4);
    CHECK(r.pair_product_matches);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(r.group.element_order(i) == 2);
    }
}

TEST_CASE("shifted cocycles break the pair-product decomposition") {
    const PermGroup z2 = cyclic(2);

    // Exhaustive search over Z2-valued tables: every table satisfying the
    // cocycle identity with psi(e, g) != e for some g must report a failing
    // pair product. The constant-1 table is one such witness.
    bool found_witness = false;
    for (unsigned bits = 0; bits < 16; ++bits) {
        CocycleTable psi{{(bits >> 0) & 1u, (bits >> 1) & 1u},
                         {(bits >> 2) & 1u, (bits >> 3) & 1u}};
        CentralExtensionResult r;
        try {
            r = central_extension(z2, z2, psi);
        } catch (const ValidationError&) {
            continue;  // fails the cocycle identity
        }
        const bool normalized_second = (psi[0][0] == 0 && psi[0][1] == 0);
        CHECK(r.pair_product_matches == normalized_second);
        if (!normalized_second) {
            found_witness = true;
            CHECK_FALSE(r.pair_product_matches);
            CHECK(r.group.order() == 4);
        }
    }
    CHECK(found_witness);
}

TEST_CASE("central extension rejects cocycle identity violations and non-abelian bases") {
    const PermGroup z2 = cyclic(2);
    const PermGroup s3 = close_generators({cycle_perm(3, {0, 1, 2}), cycle_perm(3, {1, 2})});

    // psi(1, 1) = 1 with psi(1, 0) = 1 violates the cocycle identity.
    CocycleTable bad{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(central_extension(z2, z2, bad), ValidationError);
    CHECK_THROWS_AS(central_extension(s3, z2, CocycleTable{{0, 0}, {0, 0}}), ValidationError);
}

TEST_CASE("group axioms hold on every constructed group") {
    // Spot products land inside the element set for a sampled large-ish group.
    const PermGroup z300 = close_generators({shift_perm(300, 1)});
    CHECK(z300.order() == 300);
    for (std::size_t i = 0; i < 300; i += 37) {
        CHECK(z300.product_index(i, (i * 13) % 300) < 300);
        CHECK(z300.product_index(i, z300.inverse_index(i)) == 0);
    }
}
