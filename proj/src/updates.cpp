#include "fv/updates.hpp"

#include "fv/errors.hpp"

#include <algorithm>

namespace fv {

namespace {

Operator joint_initial_state(const SystemSpec& spec, const DensityState& omega,
                             const std::vector<ProbeSpec>& probes) {
    Operator rho = embed(omega.op, system_layout(spec));
    if (probes.empty()) return rho;
    return tensor(rho, probe_state_operator(probes));
}

// rho_tot <- S^dagger rho_tot S, gate by gate
void apply_scattering_adjoint(const SystemSpec& spec, const std::vector<ProbeSpec>& probes,
                              int t_to, Operator& rho_tot) {
    apply_coupled_circuit(spec, probes, t_to, rho_tot);
    apply_free_layers(spec, 0, t_to, rho_tot, /*adjoint=*/true);
}

// reduced state on the listed probe slots, system and other probes traced out
Operator reduce_to_probes(const Operator& rho, const std::vector<std::string>& keep_ids) {
    std::set<std::string> drop;
    for (const Slot& s : rho.layout.slots())
        if (std::find(keep_ids.begin(), keep_ids.end(), s.id) == keep_ids.end())
            drop.insert(s.id);
    Operator reduced = partial_trace(rho, drop);
    if (reduced.layout.ids() != keep_ids) reduced = permute_slots(reduced, keep_ids);
    return reduced;
}

void require_hermitian_observable(const Matrix& o, const std::string& name) {
    if (!is_hermitian(o, 1e-10))
        throw PhysicsValidationError("observable of '" + name + "' is not Hermitian");
}

} // namespace

double expectation(const SystemSpec& spec, const DensityState& omega, const ObserverSpec& obs,
                   int t_to) {
    require_hermitian_observable(obs.observable, obs.name);
    Operator rho = joint_initial_state(spec, omega, {obs.probe});
    apply_scattering_adjoint(spec, {obs.probe}, t_to, rho);
    const Operator tau = reduce_to_probes(rho, {probe_slot_id(obs.probe)});
    return (tau.mat * obs.observable).trace().real();
}

DensityState nonselective_update(const SystemSpec& spec, const DensityState& omega,
                                 const ObserverSpec& obs, int t_to) {
    Operator rho = joint_initial_state(spec, omega, {obs.probe});
    apply_scattering_adjoint(spec, {obs.probe}, t_to, rho);
    Operator out = partial_trace(rho, {probe_slot_id(obs.probe)});
    out.mat = ((out.mat + out.mat.adjoint()) / 2.0).eval();
    return DensityState{std::move(out)};
}

SelectiveResult selective_update(const SystemSpec& spec, const DensityState& omega,
                                 const ObserverSpec& obs, const Matrix& effect, int t_to) {
    const SpectralCheck ec = check_effect(effect, 1e-9);
    if (!ec.ok) throw NotAnEffect("selective_update: " + ec.reason);
    Operator rho = joint_initial_state(spec, omega, {obs.probe});
    apply_scattering_adjoint(spec, {obs.probe}, t_to, rho);
    const std::string pid = probe_slot_id(obs.probe);
    const Operator sqrt_e = single_slot_operator(pid, hermitian_sqrt(effect));
    apply_gate_left(rho, sqrt_e);
    apply_gate_right(rho, sqrt_e);
    Operator out = partial_trace(rho, {pid});
    const double p = out.mat.trace().real();
    if (p <= kZeroProbabilityTol)
        throw ZeroProbability("selective_update: success probability below threshold");
    out.mat = ((out.mat + out.mat.adjoint()) / (2.0 * p)).eval();
    return SelectiveResult{DensityState{std::move(out)}, p};
}

double marginal_probability(const SystemSpec& spec, const DensityState& omega,
                            const std::vector<ObserverSpec>& observers, std::size_t target,
                            int t_to) {
    const ObserverSpec& b = observers.at(target);
    const SpectralCheck ec = check_effect(b.observable, 1e-9);
    if (!ec.ok) throw NotAnEffect("marginal_probability: target observable: " + ec.reason);
    std::vector<ProbeSpec> probes;
    for (const ObserverSpec& o : observers) probes.push_back(o.probe);
    Operator rho = joint_initial_state(spec, omega, probes);
    apply_scattering_adjoint(spec, probes, t_to, rho);
    const Operator tau = reduce_to_probes(rho, {probe_slot_id(b.probe)});
    return (tau.mat * b.observable).trace().real();
}

double conditional_expectation(const SystemSpec& spec, const DensityState& omega,
                               const ObserverSpec& obs_a, const Matrix& effect_a,
                               const ObserverSpec& obs_b, int t_to) {
    const SpectralCheck ec = check_effect(effect_a, 1e-9);
    if (!ec.ok) throw NotAnEffect("conditional_expectation: " + ec.reason);
    require_hermitian_observable(obs_b.observable, obs_b.name);
    const std::vector<ProbeSpec> probes{obs_a.probe, obs_b.probe};
    Operator rho = joint_initial_state(spec, omega, probes);
    apply_scattering_adjoint(spec, probes, t_to, rho);
    const Operator tau =
        reduce_to_probes(rho, {probe_slot_id(obs_a.probe), probe_slot_id(obs_b.probe)});
    const Eigen::Index db = obs_b.probe.dim;
    Matrix joint(effect_a.rows() * db, effect_a.cols() * db);
    for (Eigen::Index i = 0; i < effect_a.rows(); ++i)
        for (Eigen::Index j = 0; j < effect_a.cols(); ++j)
            joint.block(i * db, j * db, db, db) = effect_a(i, j) * obs_b.observable;
    const double num = (tau.mat * joint).trace().real();
    Matrix marginal_a(effect_a.rows() * db, effect_a.cols() * db);
    for (Eigen::Index i = 0; i < effect_a.rows(); ++i)
        for (Eigen::Index j = 0; j < effect_a.cols(); ++j)
            marginal_a.block(i * db, j * db, db, db) =
                effect_a(i, j) * Matrix::Identity(db, db);
    const double p = (tau.mat * marginal_a).trace().real();
    if (p <= kZeroProbabilityTol)
        throw ZeroProbability("conditional_expectation: conditioning probability is zero");
    return num / p;
}

ComposeResult compose_updates(const SystemSpec& spec, const std::vector<UpdateMap>& maps,
                              const DensityState& omega, int t_to) {
    ComposeResult result{omega, 1.0};
    for (const UpdateMap& m : maps) {
        if (m.kind == UpdateKind::NonSelective) {
            result.state = nonselective_update(spec, result.state, m.observer, t_to);
        } else {
            if (!m.effect) throw NotAnEffect("selective update map without an effect");
            SelectiveResult r = selective_update(spec, result.state, m.observer, *m.effect, t_to);
            result.state = std::move(r.state);
            result.probability *= r.probability;
        }
    }
    return result;
}

std::vector<Region> coupling_zones(const std::vector<ObserverSpec>& observers) {
    std::vector<Region> out;
    out.reserve(observers.size());
    for (const ObserverSpec& o : observers) out.push_back(o.probe.coupling_zone());
    return out;
}

Operator observer_induced_observable(const SystemSpec& spec, const ObserverSpec& obs, int t_to) {
    const std::vector<ProbeSpec> probes{obs.probe};
    const ScatteringMap theta = scattering_operator(spec, probes, t_to);
    return induced_observable(theta, probes,
                              single_slot_operator(probe_slot_id(obs.probe), obs.observable));
}

FactorisationReport check_causal_factorisation(const SystemSpec& spec,
                                               const std::vector<ObserverSpec>& observers,
                                               const CausalOrder& order, double tol,
                                               bool force) {
    if (order.order.size() != observers.size())
        throw NotOrderable("order must list every observer exactly once");
    if (!force && !is_valid_causal_order(spec.lattice, coupling_zones(observers), order.order))
        throw NotOrderable("supplied order is not a causal linear order");

    std::vector<ProbeSpec> probes;
    for (const ObserverSpec& o : observers) probes.push_back(o.probe);
    const int t_to = spec.lattice.depth;
    const ScatteringMap super = scattering_operator(spec, probes, t_to);

    // ordered composition of individually embedded scattering unitaries,
    // earliest observer leftmost
    Operator composed = identity_operator(super.s.layout);
    for (std::size_t idx : order.order) {
        const ScatteringMap si = scattering_operator(spec, {observers[idx].probe}, t_to);
        composed.mat = composed.mat * embed(si.s, super.s.layout).mat;
    }

    FactorisationReport report;
    // generating set: non-identity single-site pullbacks at a spread of cells,
    // plus one basis element per probe
    std::vector<Operator> gens;
    const std::vector<Matrix> basis = gell_mann_basis(spec.site_dim);
    for (int t = 0; t < spec.lattice.depth; ++t)
        for (int x = 0; x < spec.lattice.width; ++x)
            gens.push_back(heisenberg_pullback(spec, basis[1 + ((x + t) % (basis.size() - 1))],
                                               x, t));
    for (const ProbeSpec& p : probes) {
        const std::vector<Matrix> pb = gell_mann_basis(p.dim);
        gens.push_back(single_slot_operator(probe_slot_id(p), pb[1]));
    }
    for (const Operator& g : gens) {
        const Operator via_super = theta_apply(super, g);
        const Operator wide = embed(g, super.s.layout);
        const Matrix via_composed = composed.mat * wide.mat * composed.mat.adjoint();
        const double dev =
            (via_super.mat - via_composed).norm() / std::max(g.mat.norm(), 1e-300);
        report.max_deviation = std::max(report.max_deviation, dev);
        ++report.generators_checked;
    }
    report.pass = report.max_deviation <= tol;
    return report;
}

double n_observer_expectation(const SystemSpec& spec, const DensityState& omega,
                              const std::vector<ObserverSpec>& observers, std::size_t target,
                              int t_to) {
    const ObserverSpec& b = observers.at(target);
    require_hermitian_observable(b.observable, b.name);
    const auto orders = enumerate_causal_orders(spec.lattice, coupling_zones(observers));
    if (orders.empty()) throw NotOrderable("observers are not causally orderable");
    const std::vector<std::size_t>& order = orders.front().order;

    std::vector<UpdateMap> before;
    for (std::size_t idx : order) {
        if (idx == target) break;
        before.push_back(UpdateMap{UpdateKind::NonSelective, observers[idx], std::nullopt});
    }
    const DensityState updated = compose_updates(spec, before, omega, t_to).state;
    const Operator eps_b = observer_induced_observable(spec, b, t_to);
    return (embed(updated.op, eps_b.layout).mat * eps_b.mat).trace().real();
}

double super_observer_expectation(const SystemSpec& spec, const DensityState& omega,
                                  const std::vector<ObserverSpec>& observers, std::size_t target,
                                  int t_to) {
    const ObserverSpec& b = observers.at(target);
    std::vector<ProbeSpec> probes;
    for (const ObserverSpec& o : observers) probes.push_back(o.probe);
    Operator rho = joint_initial_state(spec, omega, probes);
    apply_scattering_adjoint(spec, probes, t_to, rho);
    const Operator tau = reduce_to_probes(rho, {probe_slot_id(b.probe)});
    return (tau.mat * b.observable).trace().real();
}

} // namespace fv
