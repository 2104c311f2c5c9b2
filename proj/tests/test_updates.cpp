#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fv/errors.hpp"
#include "fv/updates.hpp"

#include "oracle.hpp"

using namespace fv;

namespace {

Matrix swap2() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1.0;
    return m;
}

Matrix ket0() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    return m;
}

Matrix plus_state() { return Matrix::Constant(2, 2, 0.5); }

ObserverSpec make_observer(std::string name, Matrix state, std::vector<Coupling> couplings,
                           Matrix observable, bool nonlocal = false) {
    ObserverSpec o;
    o.name = name;
    o.probe.id = std::move(name);
    o.probe.dim = 2;
    o.probe.initial_state = std::move(state);
    o.probe.couplings = std::move(couplings);
    o.probe.nonlocal = nonlocal;
    o.observable = std::move(observable);
    return o;
}

ObserverSpec random_observer(const SystemSpec& spec, std::string name, Rng& rng,
                             std::vector<Cell> cells, bool effect_observable = false) {
    std::vector<Coupling> cs;
    for (const Cell& c : cells) cs.push_back({c, random_unitary(4, rng)});
    return make_observer(std::move(name), random_density_matrix(2, rng), std::move(cs),
                         effect_observable ? random_effect_matrix(2, rng)
                                           : random_hermitian(2, rng));
}

DensityState random_system_state(const SystemSpec& spec, Rng& rng) {
    const SlotLayout lay = system_layout(spec);
    return make_density_state(make_operator(random_density_matrix(lay.total_dim(), rng), lay));
}

DensityState system_state(const SystemSpec& spec, Matrix m) {
    return make_density_state(make_operator(std::move(m), system_layout(spec)));
}

} // namespace

TEST_CASE("expectation: trivial coupling depends only on the probe") {
    Rng rng(51);
    const SystemSpec spec = make_random_brickwork(Lattice(3, 2), 2, rng);
    const ObserverSpec obs = make_observer("a", random_density_matrix(2, rng), {},
                                           random_hermitian(2, rng));
    const double direct = (obs.probe.initial_state * obs.observable).trace().real();
    for (int i = 0; i < 3; ++i)
        CHECK(expectation(spec, random_system_state(spec, rng), obs, 2) ==
              doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("expectation equals the evolve-then-measure oracle on random configs") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        Rng rng = Rng(seed).stream("upd-exp");
        const SystemSpec spec = make_random_brickwork(Lattice(3, 3), 2, rng);
        const ObserverSpec obs =
            random_observer(spec, "a", rng, {{1, 0}, {2, 1}});
        const Matrix rho = random_density_matrix(8, rng);
        const double got = expectation(spec, system_state(spec, rho), obs, 3);
        const double want = oracle::measure_probe(spec, rho, {obs.probe}, 0, obs.observable, 3);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("expectation rejects non-Hermitian observables") {
    Rng rng(52);
    const SystemSpec spec = make_random_brickwork(Lattice(3, 2), 2, rng);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    const ObserverSpec obs = make_observer("a", ket0(), {}, bad);
    CHECK_THROWS_AS(expectation(spec, random_system_state(spec, rng), obs, 2),
                    PhysicsValidationError);
}

TEST_CASE("nonselective update matches the oracle and is trivial for no coupling") {
    Rng rng(53);
    const SystemSpec spec = make_random_brickwork(Lattice(3, 3), 2, rng);
    SUBCASE("no coupling leaves the state untouched") {
        const ObserverSpec obs = make_observer("a", ket0(), {}, random_hermitian(2, rng));
        const DensityState omega = random_system_state(spec, rng);
        const DensityState updated = nonselective_update(spec, omega, obs, 3);
        CHECK((updated.op.mat - omega.op.mat).norm() < 1e-12);
    }
    SUBCASE("matches the oracle on random configs") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            Rng trng = Rng(seed).stream("upd-ns");
            const SystemSpec s2 = make_random_brickwork(Lattice(3, 3), 2, trng);
            const ObserverSpec obs = random_observer(s2, "a", trng, {{0, 0}, {1, 1}});
            const Matrix rho = random_density_matrix(8, trng);
            const DensityState updated = nonselective_update(s2, system_state(s2, rho), obs, 3);
            const oracle::Mat want = oracle::updated_system_state(s2, rho, {obs.probe}, 3);
            CHECK((updated.op.mat - want).norm() < 1e-10);
            CHECK(check_density(updated.op.mat, 1e-10).ok);
        }
    }
    SUBCASE("SWAP coupling deposits the probe state onto the site") {
        const SystemSpec flat = make_brickwork(Lattice(3, 2), 2, Matrix::Identity(4, 4));
        const ObserverSpec obs = make_observer("a", ket0(), {{{1, 0}, swap2()}},
                                               Matrix::Identity(2, 2));
        const DensityState omega = random_system_state(spec, rng);
        const DensityState fixed =
            nonselective_update(flat, random_system_state(flat, rng), obs, 2);
        const Operator site1 = partial_trace(fixed.op, {"s0", "s2"});
        CHECK((site1.mat - ket0()).norm() < 1e-10);
    }
}

TEST_CASE("selective update: identity effect, explicit example, zero effect") {
    Rng rng(54);
    const SystemSpec spec = make_random_brickwork(Lattice(3, 3), 2, rng);
    const ObserverSpec obs = random_observer(spec, "a", rng, {{1, 0}, {1, 1}});
    const DensityState omega = random_system_state(spec, rng);
    SUBCASE("identity effect reduces to the nonselective map with p = 1") {
        const SelectiveResult r = selective_update(spec, omega, obs, Matrix::Identity(2, 2), 3);
        CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-12));
        const DensityState ns = nonselective_update(spec, omega, obs, 3);
        CHECK((r.state.op.mat - ns.op.mat).norm() < 1e-10);
    }
    SUBCASE("zero effect is rejected as zero-probability post-selection") {
        CHECK_THROWS_AS(selective_update(spec, omega, obs, Matrix::Zero(2, 2), 3),
                        ZeroProbability);
    }
    SUBCASE("non-effects are rejected") {
        CHECK_THROWS_AS(selective_update(spec, omega, obs, 3.0 * Matrix::Identity(2, 2), 3),
                        NotAnEffect);
    }
    SUBCASE("SWAP + |0> projector on a |+> site gives p = 1/2 and collapses the site") {
        const SystemSpec flat = make_brickwork(Lattice(3, 2), 2, Matrix::Identity(4, 4));
        const ObserverSpec swap_obs =
            make_observer("a", ket0(), {{{1, 0}, swap2()}}, Matrix::Identity(2, 2));
        Matrix rho = oracle::kron(oracle::kron(ket0(), plus_state()), ket0());
        const SelectiveResult r =
            selective_update(flat, system_state(flat, rho), swap_obs, ket0(), 2);
        CHECK(r.probability == doctest::Approx(0.5).epsilon(1e-12));
        const Operator site1 = partial_trace(r.state.op, {"s0", "s2"});
        CHECK((site1.mat - ket0()).norm() < 1e-10);
    }
    SUBCASE("matches the oracle's post-selected state") {
        const Matrix e = random_effect_matrix(2, rng);
        const SelectiveResult r = selective_update(spec, omega, obs, e, 3);
        const auto [reduced, p] =
            oracle::selected_system_state(spec, omega.op.mat, {obs.probe}, 0, e, 3);
        CHECK(r.probability == doctest::Approx(p).epsilon(1e-10));
        CHECK((r.state.op.mat - reduced / p).norm() < 1e-9);
    }
}

TEST_CASE("marginal probability: single observer and two-observer decomposition") {
    Rng rng(55);
    const SystemSpec spec = make_random_brickwork(Lattice(4, 3), 2, rng);
    SUBCASE("single observer reduces to the expectation") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}}, true);
        const DensityState omega = random_system_state(spec, rng);
        CHECK(marginal_probability(spec, omega, {a}, 0, 3) ==
              doctest::Approx(expectation(spec, omega, a, 3)).epsilon(1e-12));
    }
    SUBCASE("non-effects are rejected") {
        ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}});
        a.observable = 5.0 * Matrix::Identity(2, 2);
        CHECK_THROWS_AS(marginal_probability(spec, random_system_state(spec, rng), {a}, 0, 3),
                        NotAnEffect);
    }
    SUBCASE("P(B) = P(A and B) + P(not A and B) on random configs") {
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            Rng trng = Rng(seed).stream("upd-marg");
            const SystemSpec s2 = make_random_brickwork(Lattice(4, 3), 2, trng);
            const ObserverSpec a = random_observer(s2, "a", trng, {{0, 0}}, true);
            const ObserverSpec b = random_observer(s2, "b", trng, {{2, 1}}, true);
            const DensityState omega = random_system_state(s2, trng);
            const Matrix ea = a.observable;
            const double p_b = marginal_probability(s2, omega, {a, b}, 1, 3);
            const double p_a = marginal_probability(s2, omega, {a, b}, 0, 3);
            const double pb_given_a = conditional_expectation(s2, omega, a, ea, b, 3);
            const double pb_given_na =
                conditional_expectation(s2, omega, a, Matrix(Matrix::Identity(2, 2) - ea), b, 3);
            CHECK(p_b == doctest::Approx(p_a * pb_given_a + (1 - p_a) * pb_given_na)
                             .epsilon(1e-10));
        }
    }
}

TEST_CASE("conditional expectation: unit effect, ordered reduction, product states") {
    Rng rng(56);
    const SystemSpec spec = make_random_brickwork(Lattice(4, 3), 2, rng);
    const ObserverSpec a = random_observer(spec, "a", rng, {{0, 0}}, true);
    const ObserverSpec b = random_observer(spec, "b", rng, {{1, 1}, {2, 2}});
    const DensityState omega = random_system_state(spec, rng);
    SUBCASE("conditioning on the unit effect is no conditioning") {
        // A still couples; the unconditional reference keeps A's probe in place
        CHECK(conditional_expectation(spec, omega, a, Matrix::Identity(2, 2), b, 3) ==
              doctest::Approx(super_observer_expectation(spec, omega, {a, b}, 1, 3))
                  .epsilon(1e-10));
    }
    SUBCASE("A before B: equals expectation in the selectively updated state") {
        const Matrix ea = a.observable;
        const double direct = conditional_expectation(spec, omega, a, ea, b, 3);
        const SelectiveResult sel = selective_update(spec, omega, a, ea, 3);
        const double via_update = expectation(spec, sel.state, b, 3);
        CHECK(direct == doctest::Approx(via_update).epsilon(1e-10));
    }
    SUBCASE("zero-probability conditioning throws") {
        CHECK_THROWS_AS(conditional_expectation(spec, omega, a, Matrix::Zero(2, 2), b, 3),
                        ZeroProbability);
    }
}

TEST_CASE("compose_updates: empty sequence, spacelike order independence, chains") {
    Rng rng(57);
    const SystemSpec spec = make_random_brickwork(Lattice(5, 3), 2, rng);
    const DensityState omega = random_system_state(spec, rng);
    SUBCASE("empty composition is the identity") {
        const ComposeResult r = compose_updates(spec, {}, omega, 3);
        CHECK((r.state.op.mat - omega.op.mat).norm() == 0.0);
        CHECK(r.probability == 1.0);
    }
    SUBCASE("spacelike observers update in either order") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{0, 0}});
        const ObserverSpec b = random_observer(spec, "b", rng, {{4, 0}});
        const UpdateMap ua{UpdateKind::NonSelective, a, std::nullopt};
        const UpdateMap ub{UpdateKind::NonSelective, b, std::nullopt};
        const ComposeResult ab = compose_updates(spec, {ua, ub}, omega, 3);
        const ComposeResult ba = compose_updates(spec, {ub, ua}, omega, 3);
        CHECK((ab.state.op.mat - ba.state.op.mat).norm() < 1e-10);
    }
    SUBCASE("selective chain equals single-shot joint post-selection") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{0, 0}});
        const ObserverSpec b = random_observer(spec, "b", rng, {{2, 1}});
        const Matrix e1 = random_effect_matrix(2, rng);
        const Matrix e2 = random_effect_matrix(2, rng);
        const ComposeResult chain = compose_updates(
            spec, {{UpdateKind::Selective, a, e1}, {UpdateKind::Selective, b, e2}}, omega, 3);
        // single shot: both probes in one circuit, joint effect e1 x e2
        const std::vector<ProbeSpec> probes{a.probe, b.probe};
        Operator rho = tensor(embed(omega.op, system_layout(spec)),
                              probe_state_operator(probes));
        apply_coupled_circuit(spec, probes, 3, rho);
        apply_free_layers(spec, 0, 3, rho, true);
        apply_gate_left(rho, single_slot_operator(probe_slot_id(a.probe), e1));
        apply_gate_left(rho, single_slot_operator(probe_slot_id(b.probe), e2));
        Operator joint = partial_trace(rho, {probe_slot_id(a.probe), probe_slot_id(b.probe)});
        const double p = joint.mat.trace().real();
        CHECK(chain.probability == doctest::Approx(p).epsilon(1e-10));
        CHECK((chain.state.op.mat - joint.mat / p).norm() < 1e-9);
    }
}

TEST_CASE("update maps are affine in the state") {
    Rng rng(58);
    const SystemSpec spec = make_random_brickwork(Lattice(3, 3), 2, rng);
    const ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}, {2, 1}});
    const Matrix r1 = random_density_matrix(8, rng);
    const Matrix r2 = random_density_matrix(8, rng);
    const double lam = 0.3;
    const Matrix mix = lam * r1 + (1 - lam) * r2;
    const Matrix u_mix = nonselective_update(spec, system_state(spec, mix), a, 3).op.mat;
    const Matrix u1 = nonselective_update(spec, system_state(spec, r1), a, 3).op.mat;
    const Matrix u2 = nonselective_update(spec, system_state(spec, r2), a, 3).op.mat;
    CHECK((u_mix - lam * u1 - (1 - lam) * u2).norm() < 1e-10);
}

TEST_CASE("causal factorisation: identity for valid orders, failure when forced") {
    Rng rng(59);
    const SystemSpec spec = make_random_brickwork(Lattice(4, 3), 2, rng);
    SUBCASE("single observer factorises trivially") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}});
        const FactorisationReport r =
            check_causal_factorisation(spec, {a}, CausalOrder{{0}}, 1e-10);
        CHECK(r.pass);
        CHECK(r.max_deviation <= 1e-12);
    }
    SUBCASE("ordered pair factorises; spacelike pair factorises both ways") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}});
        const ObserverSpec b = random_observer(spec, "b", rng, {{1, 2}});
        const FactorisationReport r =
            check_causal_factorisation(spec, {a, b}, CausalOrder{{0, 1}}, 1e-10);
        CHECK(r.pass);
        const ObserverSpec l = random_observer(spec, "l", rng, {{0, 0}});
        const ObserverSpec m = random_observer(spec, "m", rng, {{3, 0}});
        CHECK(check_causal_factorisation(spec, {l, m}, CausalOrder{{0, 1}}, 1e-10).pass);
        CHECK(check_causal_factorisation(spec, {l, m}, CausalOrder{{1, 0}}, 1e-10).pass);
    }
    SUBCASE("invalid orders are rejected") {
        const ObserverSpec a = random_observer(spec, "a", rng, {{1, 0}});
        const ObserverSpec b = random_observer(spec, "b", rng, {{1, 2}});
        CHECK_THROWS_AS(check_causal_factorisation(spec, {a, b}, CausalOrder{{1, 0}}, 1e-10),
                        NotOrderable);
        CHECK_THROWS_AS(check_causal_factorisation(spec, {a, b}, CausalOrder{{0}}, 1e-10),
                        NotOrderable);
    }
    SUBCASE("same-cell probes with non-commuting gates fail when forced") {
        // same-layer couplings are applied in probe-id order, so only the
        // reversed forced order exposes the non-commutativity
        const ObserverSpec a = random_observer(spec, "a", rng, {{1, 1}});
        const ObserverSpec b = random_observer(spec, "b", rng, {{1, 1}});
        const FactorisationReport applied_order = check_causal_factorisation(
            spec, {a, b}, CausalOrder{{0, 1}}, 1e-10, /*force=*/true);
        CHECK(applied_order.pass);
        const FactorisationReport reversed = check_causal_factorisation(
            spec, {a, b}, CausalOrder{{1, 0}}, 1e-10, /*force=*/true);
        CHECK_FALSE(reversed.pass);
        CHECK(reversed.max_deviation > 1e-3);
    }
}

TEST_CASE("n-observer expectation: base cases, order independence, future deletion") {
    Rng rng(60);
    const SystemSpec spec = make_random_brickwork(Lattice(5, 4), 2, rng);
    const DensityState omega = random_system_state(spec, rng);
    const ObserverSpec a = random_observer(spec, "a", rng, {{0, 0}});
    const ObserverSpec b = random_observer(spec, "b", rng, {{2, 1}, {2, 2}});
    const ObserverSpec c = random_observer(spec, "c", rng, {{4, 0}});
    SUBCASE("earliest target reduces to the plain expectation") {
        const double solo = expectation(spec, omega, a, 4);
        CHECK(n_observer_expectation(spec, omega, {a, b}, 0, 4) ==
              doctest::Approx(solo).epsilon(1e-10));
    }
    SUBCASE("agrees with the direct super-circuit evaluation") {
        const double composed = n_observer_expectation(spec, omega, {a, b, c}, 1, 4);
        const double direct = super_observer_expectation(spec, omega, {a, b, c}, 1, 4);
        CHECK(composed == doctest::Approx(direct).epsilon(1e-9));
    }
    SUBCASE("identical across every valid causal order") {
        const auto orders =
            enumerate_causal_orders(spec.lattice, coupling_zones({a, b, c}));
        REQUIRE(orders.size() >= 2);
        const double reference = n_observer_expectation(spec, omega, {a, b, c}, 1, 4);
        // permuting the observer list exercises different chosen orders
        CHECK(n_observer_expectation(spec, omega, {c, b, a}, 1, 4) ==
              doctest::Approx(reference).epsilon(1e-10));
        CHECK(n_observer_expectation(spec, omega, {b, a, c}, 0, 4) ==
              doctest::Approx(reference).epsilon(1e-10));
    }
    SUBCASE("observers after the target are ignored") {
        const ObserverSpec late = random_observer(spec, "late", rng, {{2, 3}});
        const double with_late = n_observer_expectation(spec, omega, {a, b, late}, 1, 4);
        const double without = n_observer_expectation(spec, omega, {a, b}, 1, 4);
        CHECK(with_late == doctest::Approx(without).epsilon(1e-10));
    }
    SUBCASE("unorderable families are rejected") {
        ObserverSpec clash = random_observer(spec, "x", rng, {{2, 1}});
        CHECK_THROWS_AS(n_observer_expectation(spec, omega, {b, clash}, 0, 4), NotOrderable);
    }
}
