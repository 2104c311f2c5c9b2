#pragma once

// State-update calculus: expectation values, non-selective and selective
// updates, marginal and conditional probabilities, composition for causally
// orderable observer families and the causal-factorisation checker.

#include "fv/probes.hpp"

#include <optional>

namespace fv {

struct ObserverSpec {
    std::string name;
    ProbeSpec probe;
    Matrix observable; // on the probe, probe.dim x probe.dim
};

enum class UpdateKind { NonSelective, Selective };

struct UpdateMap {
    UpdateKind kind = UpdateKind::NonSelective;
    ObserverSpec observer;
    std::optional<Matrix> effect; // required for Selective
};

inline constexpr double kZeroProbabilityTol = 1e-12;

// (omega x sigma)(Theta(1 x O)); requires O Hermitian
double expectation(const SystemSpec& spec, const DensityState& omega, const ObserverSpec& obs,
                   int t_to);

// rho' = Tr_probe[S^dagger (rho x sigma) S]
DensityState nonselective_update(const SystemSpec& spec, const DensityState& omega,
                                 const ObserverSpec& obs, int t_to);

struct SelectiveResult {
    DensityState state;
    double probability = 0.0;
};

// post-selected state and success probability; throws ZeroProbability below tol
SelectiveResult selective_update(const SystemSpec& spec, const DensityState& omega,
                                 const ObserverSpec& obs, const Matrix& effect, int t_to);

// success probability of the target's effect with every probe coupled
double marginal_probability(const SystemSpec& spec, const DensityState& omega,
                            const std::vector<ObserverSpec>& observers, std::size_t target,
                            int t_to);

// E(O_B | effect_A) as the ratio of super-observer expectations
double conditional_expectation(const SystemSpec& spec, const DensityState& omega,
                               const ObserverSpec& obs_a, const Matrix& effect_a,
                               const ObserverSpec& obs_b, int t_to);

struct ComposeResult {
    DensityState state;
    double probability = 1.0; // product of selective success probabilities
};

// left-composition of updates, earliest first
ComposeResult compose_updates(const SystemSpec& spec, const std::vector<UpdateMap>& maps,
                              const DensityState& omega, int t_to);

std::vector<Region> coupling_zones(const std::vector<ObserverSpec>& observers);

struct FactorisationReport {
    double max_deviation = 0.0;
    int generators_checked = 0;
    bool pass = false;
};

// compares the super-observer scattering map against the ordered composition of
// the individual maps on a generating operator set; force skips the order
// validation so non-orderable families can be probed for the expected failure
FactorisationReport check_causal_factorisation(const SystemSpec& spec,
                                               const std::vector<ObserverSpec>& observers,
                                               const CausalOrder& order, double tol,
                                               bool force = false);

// expectation of the target's induced observable after updating by everything
// that precedes it in a valid causal order; later observers are ignored
double n_observer_expectation(const SystemSpec& spec, const DensityState& omega,
                              const std::vector<ObserverSpec>& observers, std::size_t target,
                              int t_to);

// same value computed directly in the super-observer circuit (no factorisation)
double super_observer_expectation(const SystemSpec& spec, const DensityState& omega,
                                  const std::vector<ObserverSpec>& observers, std::size_t target,
                                  int t_to);

// induced observable of a single observer's probe observable
Operator observer_induced_observable(const SystemSpec& spec, const ObserverSpec& obs, int t_to);

} // namespace fv
