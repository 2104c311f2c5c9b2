#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fv/errors.hpp"
#include "fv/qop.hpp"

#include "oracle.hpp"

using namespace fv;

namespace {

Operator random_op(const SlotLayout& layout, Rng& rng) {
    const Eigen::Index d = layout.total_dim();
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return make_operator(std::move(m), layout);
}

} // namespace

TEST_CASE("layout basics and failure modes") {
    const SlotLayout lay({{"a", 2}, {"b", 3}, {"c", 2}});
    CHECK(lay.total_dim() == 12);
    CHECK(lay.strides() == std::vector<Eigen::Index>{6, 2, 1});
    CHECK(lay.require("b") == 1);
    CHECK_FALSE(lay.contains("z"));
    CHECK_THROWS_AS(lay.require("z"), UnknownSlot);
    CHECK_THROWS_AS(SlotLayout({{"a", 2}, {"a", 2}}), SlotCollision);
    CHECK_THROWS_AS(SlotLayout({{"a", 0}}), DimensionMismatch);
    CHECK_THROWS_AS(make_operator(Matrix::Identity(3, 3), lay), DimensionMismatch);
}

TEST_CASE("tensor matches the explicit Kronecker product") {
    Rng rng(11);
    const Operator a = random_op(SlotLayout({{"a", 2}, {"b", 3}}), rng);
    const Operator b = random_op(SlotLayout({{"c", 2}}), rng);
    const Operator t = tensor(a, b);
    CHECK(t.layout.ids() == std::vector<std::string>{"a", "b", "c"});
    CHECK((t.mat - oracle::kron(a.mat, b.mat)).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK_THROWS_AS(tensor(a, random_op(SlotLayout({{"a", 2}}), rng)), SlotCollision);
}

TEST_CASE("permute_slots is a basis change that preserves spectra and round-trips") {
    Rng rng(12);
    const SlotLayout lay({{"a", 2}, {"b", 3}, {"c", 2}});
    const Operator a = random_op(lay, rng);
    const Operator p = permute_slots(a, {"c", "a", "b"});
    CHECK(p.layout.ids() == std::vector<std::string>{"c", "a", "b"});
    CHECK(std::abs(p.mat.trace() - a.mat.trace()) < 1e-12);
    const Operator back = permute_slots(p, {"a", "b", "c"});
    CHECK((back.mat - a.mat).norm() < 1e-12);
    // two-slot permutation equals conjugation by the swap matrix
    const Operator ab = random_op(SlotLayout({{"a", 2}, {"b", 2}}), rng);
    const Operator ba = permute_slots(ab, {"b", "a"});
    Matrix swap = Matrix::Zero(4, 4);
    for (Eigen::Index i = 0; i < 2; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) swap(i * 2 + j, j * 2 + i) = 1.0;
    CHECK((ba.mat - swap * ab.mat * swap.adjoint()).norm() < 1e-12);
    CHECK_THROWS_AS(permute_slots(a, {"a", "b"}), DimensionMismatch);
    CHECK_THROWS_AS(permute_slots(a, {"a", "b", "z"}), UnknownSlot);
}

TEST_CASE("embed tensors in identities on the missing slots") {
    Rng rng(13);
    const SlotLayout target({{"a", 2}, {"b", 3}, {"c", 2}});
    const Operator b = random_op(SlotLayout({{"b", 3}}), rng);
    const Operator wide = embed(b, target);
    const std::vector<Eigen::Index> dims{2, 3, 2};
    CHECK((wide.mat - oracle::op_on_one(dims, 1, b.mat)).norm() < 1e-12);
    // multiplicative: embed(xy) = embed(x) embed(y)
    const Operator b2 = random_op(SlotLayout({{"b", 3}}), rng);
    const Operator prod = embed(make_operator(b.mat * b2.mat, b.layout), target);
    CHECK((prod.mat - wide.mat * embed(b2, target).mat).norm() < 1e-10);
    CHECK_THROWS_AS(embed(random_op(SlotLayout({{"z", 2}}), rng), target), UnknownSlot);
}

TEST_CASE("partial trace matches the index-arithmetic oracle") {
    Rng rng(14);
    const SlotLayout lay({{"a", 2}, {"b", 3}, {"c", 2}});
    const std::vector<Eigen::Index> dims{2, 3, 2};
    const Operator a = random_op(lay, rng);
    const Operator tb = partial_trace(a, {"b"});
    CHECK(tb.layout.ids() == std::vector<std::string>{"a", "c"});
    CHECK((tb.mat - oracle::ptrace(a.mat, dims, {true, false, true})).norm() < 1e-12);
    const Operator tac = partial_trace(a, {"a", "c"});
    CHECK((tac.mat - oracle::ptrace(a.mat, dims, {false, true, false})).norm() < 1e-12);
    CHECK(std::abs(partial_trace(a, {"a", "b", "c"}).mat(0, 0) - a.mat.trace()) < 1e-12);
    // tracing what embed added recovers the original times the identity dims
    const Operator small = random_op(SlotLayout({{"b", 3}}), rng);
    const Operator rec = partial_trace(embed(small, lay), {"a", "c"});
    CHECK((rec.mat - 4.0 * small.mat).norm() < 1e-12);
}

TEST_CASE("strided gate application equals the dense embedded product") {
    Rng rng(15);
    const SlotLayout lay({{"a", 2}, {"b", 3}, {"c", 2}, {"d", 2}});
    for (int rep = 0; rep < 5; ++rep) {
        Operator target = random_op(lay, rng);
        const Operator dense_target = target;
        const Operator gate = random_op(SlotLayout({{"d", 2}, {"b", 3}}), rng);
        const Matrix wide = embed(gate, lay).mat;
        Operator left = target;
        apply_gate_left(left, gate);
        CHECK((left.mat - wide * dense_target.mat).norm() < 1e-10);
        Operator right = target;
        apply_gate_right(right, gate);
        CHECK((right.mat - dense_target.mat * wide).norm() < 1e-10);
    }
}

TEST_CASE("conjugate_by preserves hermiticity and spectra for unitaries") {
    Rng rng(16);
    const SlotLayout lay({{"a", 2}, {"b", 2}});
    const Operator u = make_operator(random_unitary(4, rng), lay);
    const Matrix h = random_hermitian(2, rng);
    const Operator a = single_slot_operator("b", h);
    const Operator c = conjugate_by(u, a);
    CHECK(is_hermitian(c.mat, 1e-12));
    CHECK(std::abs(c.mat.trace() - 2.0 * h.trace()) < 1e-12);
}

TEST_CASE("spectral checks classify effects and densities") {
    Rng rng(17);
    CHECK(check_effect(Matrix::Identity(3, 3)).ok);
    CHECK(check_effect(Matrix::Zero(3, 3)).ok);
    CHECK_FALSE(check_effect(2.0 * Matrix::Identity(3, 3)).ok); // above one
    Matrix nh = Matrix::Zero(2, 2);
    nh(0, 1) = 1.0;
    CHECK_FALSE(check_effect(nh).ok);
    CHECK(check_density(random_density_matrix(4, rng)).ok);
    CHECK_FALSE(check_density(Matrix::Identity(4, 4)).ok); // trace 4
    CHECK(check_effect(random_effect_matrix(4, rng)).ok);
    CHECK_THROWS_AS(
        make_density_state(make_operator(Matrix::Identity(2, 2), SlotLayout({{"a", 2}}))),
        PhysicsValidationError);
}

TEST_CASE("hermitian_sqrt squares back to the argument") {
    Rng rng(18);
    const Matrix e = random_effect_matrix(5, rng);
    const Matrix s = hermitian_sqrt(e);
    CHECK(is_hermitian(s, 1e-12));
    CHECK((s * s - e).norm() < 1e-10);
}

TEST_CASE("random unitaries are unitary and seed-deterministic") {
    Rng rng_a(99), rng_b(99);
    const Matrix u1 = random_unitary(6, rng_a);
    const Matrix u2 = random_unitary(6, rng_b);
    CHECK((u1 - u2).norm() == 0.0); // bit-identical for equal seeds
    CHECK((u1 * u1.adjoint() - Matrix::Identity(6, 6)).norm() < 1e-12);
    Rng rng_c(100);
    CHECK((random_unitary(6, rng_c) - u1).norm() > 1e-3);
}

TEST_CASE("named rng streams are independent and reproducible") {
    Rng root(7);
    Rng s1 = root.stream("alpha");
    Rng s2 = root.stream("alpha");
    Rng s3 = root.stream("beta");
    CHECK(s1.next_u64() == s2.next_u64());
    Rng s4 = root.stream("alpha", 1);
    CHECK(Rng(7).stream("alpha").next_u64() != s3.next_u64());
    CHECK(Rng(7).stream("alpha").next_u64() != s4.next_u64());
    // gaussian moments sanity
    Rng g(123);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double v = g.gaussian();
        sum += v;
        sq += v * v;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("random densities are valid and pure states have unit purity") {
    Rng rng(21);
    const Matrix rho = random_density_matrix(6, rng);
    CHECK(check_density(rho).ok);
    const Matrix pure = random_pure_density(6, rng);
    CHECK(check_density(pure).ok);
    CHECK(std::abs((pure * pure).trace().real() - 1.0) < 1e-10);
}
