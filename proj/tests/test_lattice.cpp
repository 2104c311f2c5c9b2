#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fv/errors.hpp"
#include "fv/lattice_qft.hpp"

#include "oracle.hpp"

using namespace fv;

TEST_CASE("brickwork layers couple alternating bonds") {
    const SystemSpec spec = make_brickwork(Lattice(5, 4), 2, Matrix::Identity(4, 4));
    REQUIRE(spec.layer_gates.size() == 4);
    CHECK(spec.layer_gates[0].size() == 2); // (0,1), (2,3)
    CHECK(spec.layer_gates[0][0].left_site == 0);
    CHECK(spec.layer_gates[0][1].left_site == 2);
    CHECK(spec.layer_gates[1].size() == 2); // (1,2), (3,4)
    CHECK(spec.layer_gates[1][0].left_site == 1);
    CHECK(spec.layer_gates[1][1].left_site == 3);
    validate_system(spec, 1e-12);
}

TEST_CASE("system validation rejects bad gate sets") {
    SystemSpec spec = make_brickwork(Lattice(4, 2), 2, Matrix::Identity(4, 4));
    SUBCASE("non-unitary gate") {
        spec.layer_gates[0][0].gate *= 2.0;
        CHECK_THROWS_AS(validate_system(spec, 1e-9), PhysicsValidationError);
    }
    SUBCASE("overlapping bonds") {
        spec.layer_gates[0].push_back(BondGate{1, Matrix::Identity(4, 4)});
        CHECK_THROWS_AS(validate_system(spec, 1e-9), PhysicsValidationError);
    }
    SUBCASE("out-of-range bond") {
        spec.layer_gates[0].push_back(BondGate{3, Matrix::Identity(4, 4)});
        CHECK_THROWS_AS(validate_system(spec, 1e-9), DimensionMismatch);
    }
    SUBCASE("adjacent disjoint bonds are legal") {
        // (0,1) and (2,3) share no site
        CHECK_NOTHROW(validate_system(spec, 1e-9));
    }
}

TEST_CASE("free circuit equals the oracle circuit and composes over windows") {
    Rng rng(31);
    const SystemSpec spec = make_random_brickwork(Lattice(4, 3), 2, rng);
    const Operator u = free_circuit(spec, 0, 3);
    const oracle::Mat uo = oracle::circuit_unitary(spec, {}, 3, false);
    CHECK((u.mat - uo).norm() < 1e-12);
    CHECK((u.mat * u.mat.adjoint() - Matrix::Identity(u.dim(), u.dim())).norm() < 1e-12);
    // two-route composition across an intermediate time
    const Operator u01 = free_circuit(spec, 0, 1);
    const Operator u13 = free_circuit(spec, 1, 3);
    CHECK((u.mat - u13.mat * u01.mat).norm() < 1e-12);
    CHECK_THROWS_AS(free_circuit(spec, 2, 1), BadWindow);
    CHECK_THROWS_AS(free_circuit(spec, 0, 4), BadWindow);
}

TEST_CASE("heisenberg pullbacks stay inside the past light cone") {
    Rng rng(32);
    const SystemSpec spec = make_random_brickwork(Lattice(5, 4), 2, rng);
    const std::vector<Matrix> basis = gell_mann_basis(2);
    for (int x = 0; x < 5; ++x)
        for (int t = 0; t <= 4; ++t) {
            const Operator a = heisenberg_pullback(spec, basis[1], x, t);
            for (const int s : support_of(a, 1e-10)) CHECK(std::abs(s - x) <= t);
        }
}

TEST_CASE("spacelike pullbacks commute (microcausality)") {
    Rng rng(33);
    const SystemSpec spec = make_random_brickwork(Lattice(5, 3), 2, rng);
    const std::vector<Matrix> basis = gell_mann_basis(2);
    for (const Cell a : {Cell{0, 2}, Cell{1, 1}, Cell{4, 0}})
        for (const Cell b : {Cell{4, 2}, Cell{3, 0}, Cell{0, 0}}) {
            if (std::abs(a.x - b.x) <= std::abs(a.t - b.t)) continue; // not spacelike
            const Operator oa = heisenberg_pullback(spec, basis[2], a.x, a.t);
            const Operator ob = heisenberg_pullback(spec, basis[3], b.x, b.t);
            CHECK((oa.mat * ob.mat - ob.mat * oa.mat).norm() < 1e-10);
        }
}

TEST_CASE("generalized Gell-Mann basis is Hermitian, complete and trace-orthogonal") {
    for (const int d : {2, 3}) {
        const std::vector<Matrix> basis = gell_mann_basis(d);
        CHECK(static_cast<int>(basis.size()) == d * d);
        for (const Matrix& b : basis) CHECK(is_hermitian(b, 1e-12));
        for (std::size_t i = 1; i < basis.size(); ++i) {
            CHECK(std::abs(basis[i].trace()) < 1e-12);
            for (std::size_t j = 1; j < i; ++j)
                CHECK(std::abs((basis[i] * basis[j]).trace()) < 1e-12);
        }
    }
}

TEST_CASE("support detection finds exactly the acted-on sites") {
    const SystemSpec spec = make_brickwork(Lattice(4, 2), 2, Matrix::Identity(4, 4));
    const std::vector<Matrix> basis = gell_mann_basis(2);
    const Operator a = embed(single_slot_operator(site_slot_id(2), basis[1]),
                             system_layout(spec));
    CHECK(support_of(a, 1e-10) == std::set<int>{2});
    const Operator id = identity_operator(system_layout(spec));
    CHECK(support_of(id, 1e-10).empty());
}

TEST_CASE("commutant membership holds for pullbacks in the region, fails outside") {
    Rng rng(34);
    const SystemSpec spec = make_random_brickwork(Lattice(5, 3), 2, rng);
    const std::vector<Matrix> basis = gell_mann_basis(2);
    const Region region{{1, 2}};
    const Operator inside = heisenberg_pullback(spec, basis[1], 1, 2);
    CHECK(commutant_membership(spec, inside, region, 1e-10));
    // an operator at a spacelike cell is not localisable in the region
    const Operator outside = heisenberg_pullback(spec, basis[1], 4, 0);
    CHECK_FALSE(commutant_membership(spec, outside, region, 1e-10));
}

TEST_CASE("algebra generators cover the region with a full matrix basis per cell") {
    const SystemSpec spec = make_brickwork(Lattice(4, 2), 2, Matrix::Identity(4, 4));
    const Region n{{0, 0}, {2, 1}};
    CHECK(algebra_generators(spec, n).size() == 2 * 4);
}
