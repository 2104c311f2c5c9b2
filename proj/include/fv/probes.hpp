#pragma once

// Measurement schemes: probe specifications with per-cell coupling gates,
// coupled circuits, scattering maps Theta, induced system observables and the
// localisation checker. Probes are pointlike, carry no free dynamics of their
// own, and must follow a timelike worldline unless explicitly flagged
// nonlocal (adversary mode).

#include "fv/causal.hpp"
#include "fv/lattice_qft.hpp"
#include "fv/qop.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fv {

struct Coupling {
    Cell cell;
    Matrix gate; // unitary on (site x probe), site slot first
};

struct ProbeSpec {
    std::string id;
    int dim = 2;
    Matrix initial_state; // density matrix, dim x dim
    std::vector<Coupling> couplings;
    bool nonlocal = false; // adversary mode: worldline constraint waived

    Region coupling_zone() const;
    int last_coupling_time() const; // -1 when no couplings
};

std::string probe_slot_id(const ProbeSpec& p);

void validate_probe(const ProbeSpec& probe, const SystemSpec& spec, double tol = 1e-12);

SlotLayout joint_layout(const SystemSpec& spec, const std::vector<ProbeSpec>& probes);

struct ScatteringMap {
    Operator s; // unitary on system x involved probes
};

// Ordered product over layers 0..t_to-1 of (coupling gates at that layer in
// ascending (probe id, x) order, then the free brick layer). The interleaving
// is part of the contract; factorisation identities depend on it being uniform.
Operator coupled_circuit(const SystemSpec& spec, const std::vector<ProbeSpec>& probes, int t_to);

// rho <- U_coupled rho U_coupled^dagger, applied gate by gate (no dense product
// at the full joint dimension)
void apply_coupled_circuit(const SystemSpec& spec, const std::vector<ProbeSpec>& probes,
                           int t_to, Operator& rho);
void apply_free_layers(const SystemSpec& spec, int t_from, int t_to, Operator& rho,
                       bool adjoint);

// S := U_coupled^dagger (U_free x probe identities); with this orientation the
// heuristic expectation Tr[(rho x sigma) S (1 x Z) S^dagger] agrees with the
// direct evolve-then-measure computation.
ScatteringMap scattering_operator(const SystemSpec& spec, const std::vector<ProbeSpec>& probes,
                                  int t_to);

// S embed(a) S^dagger
Operator theta_apply(const ScatteringMap& theta, const Operator& a);

// epsilon(o) := Tr_probes[(1_S x sigma) Theta(1 x o)], an operator on the system
Operator induced_observable(const ScatteringMap& theta, const std::vector<ProbeSpec>& probes,
                            const Operator& probe_observable);

Operator probe_state_operator(const std::vector<ProbeSpec>& probes);

struct Lemma1Report {
    double max_dev_trivial_action = 0.0; // (i): Theta fixes complement generators
    double max_dev_commutant = 0.0;      // (ii): out-region images land in the in-region algebra
    int trials_run = 0;
    int skipped = 0; // out-cells whose in-region base failed the dependence check
    bool pass = false;
};

Lemma1Report check_lemma1(const SystemSpec& spec, const ProbeSpec& probe, int trials,
                          std::uint64_t seed, double tol);

} // namespace fv
