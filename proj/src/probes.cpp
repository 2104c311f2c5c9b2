#include "fv/probes.hpp"

#include "fv/errors.hpp"

#include <algorithm>

namespace fv {

Region ProbeSpec::coupling_zone() const {
    Region out;
    for (const Coupling& c : couplings) out.insert(c.cell);
    return out;
}

int ProbeSpec::last_coupling_time() const {
    int t = -1;
    for (const Coupling& c : couplings) t = std::max(t, c.cell.t);
    return t;
}

std::string probe_slot_id(const ProbeSpec& p) { return "p:" + p.id; }

void validate_probe(const ProbeSpec& probe, const SystemSpec& spec, double tol) {
    if (probe.dim < 1) throw DimensionMismatch("probe dimension must be positive");
    const SpectralCheck st = check_density(probe.initial_state, 1e-9);
    if (!st.ok)
        throw PhysicsValidationError("probe '" + probe.id + "' initial state: " + st.reason);
    const Eigen::Index gd = static_cast<Eigen::Index>(spec.site_dim) * probe.dim;
    std::vector<Cell> cells;
    for (const Coupling& c : probe.couplings) {
        if (!spec.lattice.contains(c.cell.x, c.cell.t))
            throw GeometryViolation("coupling cell outside the lattice");
        if (c.gate.rows() != gd || c.gate.cols() != gd)
            throw DimensionMismatch("coupling gate has wrong dimension");
        if ((c.gate * c.gate.adjoint() - Matrix::Identity(gd, gd)).norm() > tol)
            throw PhysicsValidationError("coupling gate is not unitary");
        cells.push_back(c.cell);
    }
    std::sort(cells.begin(), cells.end());
    if (!probe.nonlocal && !validate_probe_worldline(cells))
        throw GeometryViolation("probe '" + probe.id +
                                "' coupling cells do not form a timelike worldline");
}

SlotLayout joint_layout(const SystemSpec& spec, const std::vector<ProbeSpec>& probes) {
    std::vector<Slot> slots = system_layout(spec).slots();
    for (const ProbeSpec& p : probes) slots.push_back(Slot{probe_slot_id(p), p.dim});
    return SlotLayout(std::move(slots));
}

namespace {

struct ScheduledGate {
    std::string probe_id;
    int x;
    const Matrix* gate;
    const ProbeSpec* probe;
};

std::vector<ScheduledGate> layer_couplings(const std::vector<ProbeSpec>& probes, int t) {
    std::vector<ScheduledGate> out;
    for (const ProbeSpec& p : probes)
        for (const Coupling& c : p.couplings)
            if (c.cell.t == t) out.push_back({p.id, c.cell.x, &c.gate, &p});
    std::sort(out.begin(), out.end(), [](const ScheduledGate& a, const ScheduledGate& b) {
        return std::tie(a.probe_id, a.x) < std::tie(b.probe_id, b.x);
    });
    return out;
}

Operator coupling_gate_operator(const SystemSpec& spec, const ScheduledGate& g) {
    SlotLayout lay({Slot{site_slot_id(g.x), spec.site_dim},
                    Slot{probe_slot_id(*g.probe), g.probe->dim}});
    return Operator{*g.gate, std::move(lay)};
}

Operator bond_gate_operator(const SystemSpec& spec, const BondGate& g) {
    SlotLayout lay({Slot{site_slot_id(g.left_site), spec.site_dim},
                    Slot{site_slot_id(g.left_site + 1), spec.site_dim}});
    return Operator{g.gate, std::move(lay)};
}

} // namespace

Operator coupled_circuit(const SystemSpec& spec, const std::vector<ProbeSpec>& probes, int t_to) {
    if (t_to < 0 || t_to > spec.lattice.depth) throw BadWindow("coupled_circuit: bad window");
    for (const ProbeSpec& p : probes)
        if (p.last_coupling_time() >= t_to)
            throw BadWindow("coupled_circuit: coupling at or after t_to");
    Operator u = identity_operator(joint_layout(spec, probes));
    for (int t = 0; t < t_to; ++t) {
        for (const ScheduledGate& g : layer_couplings(probes, t))
            apply_gate_left(u, coupling_gate_operator(spec, g));
        for (const BondGate& g : spec.layer_gates[static_cast<std::size_t>(t)])
            apply_gate_left(u, bond_gate_operator(spec, g));
    }
    return u;
}

void apply_coupled_circuit(const SystemSpec& spec, const std::vector<ProbeSpec>& probes,
                           int t_to, Operator& rho) {
    if (t_to < 0 || t_to > spec.lattice.depth) throw BadWindow("apply_coupled_circuit: bad window");
    for (int t = 0; t < t_to; ++t) {
        for (const ScheduledGate& g : layer_couplings(probes, t)) {
            const Operator op = coupling_gate_operator(spec, g);
            apply_gate_left(rho, op);
            apply_gate_right(rho, Operator{op.mat.adjoint().eval(), op.layout});
        }
        for (const BondGate& g : spec.layer_gates[static_cast<std::size_t>(t)]) {
            const Operator op = bond_gate_operator(spec, g);
            apply_gate_left(rho, op);
            apply_gate_right(rho, Operator{op.mat.adjoint().eval(), op.layout});
        }
    }
}

void apply_free_layers(const SystemSpec& spec, int t_from, int t_to, Operator& rho,
                       bool adjoint) {
    const Operator u = free_circuit(spec, t_from, t_to);
    const Operator ua{u.mat.adjoint().eval(), u.layout};
    apply_gate_left(rho, adjoint ? ua : u);
    apply_gate_right(rho, adjoint ? u : ua);
}

ScatteringMap scattering_operator(const SystemSpec& spec, const std::vector<ProbeSpec>& probes,
                                  int t_to) {
    Operator uc = coupled_circuit(spec, probes, t_to); // throws when t_to is not past couplings
    const Operator uf = free_circuit(spec, 0, t_to);
    Operator s{uc.mat.adjoint(), uc.layout};
    apply_gate_right(s, uf);
    return ScatteringMap{std::move(s)};
}

Operator theta_apply(const ScatteringMap& theta, const Operator& a) {
    return conjugate_by(theta.s, a);
}

Operator probe_state_operator(const std::vector<ProbeSpec>& probes) {
    if (probes.empty()) throw DimensionMismatch("probe_state_operator: no probes");
    Operator out = single_slot_operator(probe_slot_id(probes[0]), probes[0].initial_state);
    for (std::size_t i = 1; i < probes.size(); ++i)
        out = tensor(out, single_slot_operator(probe_slot_id(probes[i]), probes[i].initial_state));
    return out;
}

Operator induced_observable(const ScatteringMap& theta, const std::vector<ProbeSpec>& probes,
                            const Operator& probe_observable) {
    const Operator image = theta_apply(theta, probe_observable);
    const Operator sigma = embed(probe_state_operator(probes), theta.s.layout);
    Operator weighted{sigma.mat * image.mat, theta.s.layout};
    std::set<std::string> drop;
    for (const ProbeSpec& p : probes) drop.insert(probe_slot_id(p));
    return partial_trace(weighted, drop);
}

Lemma1Report check_lemma1(const SystemSpec& spec, const ProbeSpec& probe, int trials,
                          std::uint64_t seed, double tol) {
    Lemma1Report report;
    const Region k = probe.coupling_zone();
    const std::vector<ProbeSpec> probes{probe};
    const ScatteringMap theta = scattering_operator(spec, probes, spec.lattice.depth);
    const Region complement = causal_complement(spec.lattice, k);
    const Region k_future = causal_future(spec.lattice, k);

    Rng rng = Rng(seed).stream("lemma1");
    const std::vector<Matrix> basis = gell_mann_basis(spec.site_dim);

    std::vector<Cell> comp_cells(complement.begin(), complement.end());
    std::vector<Cell> out_cells;
    const int t_first_out = probe.last_coupling_time() + 1;
    for (int t = t_first_out; t < spec.lattice.depth; ++t)
        for (int x = 0; x < spec.lattice.width; ++x)
            if (!causal_past(spec.lattice, k).contains({x, t})) out_cells.push_back({x, t});

    for (int trial = 0; trial < trials; ++trial) {
        // (i) Theta acts trivially on generators of the causal complement
        if (!comp_cells.empty()) {
            const Cell c = comp_cells[rng.next_below(comp_cells.size())];
            const Matrix& b = basis[rng.next_below(basis.size())];
            const Operator gen = heisenberg_pullback(spec, b, c.x, c.t);
            const Operator image = theta_apply(theta, gen);
            const Operator wide = embed(gen, theta.s.layout);
            const double dev =
                (image.mat - wide.mat).norm() / std::max(gen.mat.norm(), 1e-300);
            report.max_dev_trivial_action = std::max(report.max_dev_trivial_action, dev);
        }
        // (ii) out-region generators map into the in-region commutant
        if (!out_cells.empty()) {
            const Cell c = out_cells[rng.next_below(out_cells.size())];
            Region n_minus;
            for (const Cell& p : causal_past(spec.lattice, {c}))
                if (!k_future.contains(p)) n_minus.insert(p);
            if (!domain_of_dependence(spec.lattice, n_minus).contains(c)) {
                ++report.skipped;
            } else {
                const Matrix& b = basis[1 + rng.next_below(basis.size() - 1)]; // skip identity
                const Operator gen = heisenberg_pullback(spec, b, c.x, c.t);
                const Operator image = theta_apply(theta, gen);
                const double scale = std::max(image.mat.norm(), 1e-300);
                for (const Operator& g :
                     algebra_generators(spec, causal_complement(spec.lattice, n_minus))) {
                    const Operator wide = embed(g, theta.s.layout);
                    const double dev =
                        (image.mat * wide.mat - wide.mat * image.mat).norm() /
                        (scale * std::max(g.mat.norm(), 1e-300));
                    report.max_dev_commutant = std::max(report.max_dev_commutant, dev);
                }
            }
        }
        ++report.trials_run;
    }
    report.pass = report.max_dev_trivial_action <= tol && report.max_dev_commutant <= tol;
    return report;
}

} // namespace fv
