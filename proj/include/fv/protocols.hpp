#pragma once

// End-to-end verification experiments: the tripartite Alice/Bob/Charlie
// signalling protocol, N-observer deletion of spacelike observers, spacelike
// commutation and correlation checks, and the adversarial non-local apparatus
// that demonstrably signals.

#include "fv/updates.hpp"

#include <cstdint>
#include <string>

namespace fv {

struct SorkinConfig {
    SystemSpec system;
    ObserverSpec alice;
    ObserverSpec bob;
    Region charlie_region;
    Operator charlie_observable; // system operator localisable in charlie_region
    DensityState omega;
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

struct SignallingReport {
    double omega_AB_of_C = 0.0; // Charlie's value with Alice coupled
    double omega_B_of_C = 0.0;  // Charlie's value with Alice's coupling deleted
    double delta = 0.0;
    double operator_delta = 0.0; // Frobenius gap of the map-level identity
    bool pass = false;
    std::uint64_t seed = 0;
    int trials_run = 0;
    std::string note;
};

// validates the geometric hypotheses, then compares Charlie's expectation with
// and without Alice's coupling, at the state level and at the operator level
SignallingReport run_sorkin(const SorkinConfig& config);

struct AdversaryConfig {
    SorkinConfig base;         // bob's probe must be flagged nonlocal
    double threshold = 0.01;   // demonstration threshold on delta
    int trials = 32;           // trial 0 runs the configured gates verbatim
};

// seeded search over coupling gates and initial states for a signalling
// witness; throws NoWitnessFound when the budget is exhausted below threshold
SignallingReport run_adversary(const AdversaryConfig& config);

struct Theorem2Config {
    SystemSpec system;
    std::vector<ObserverSpec> observers;
    std::size_t target = 0;    // B, whose expectation is compared
    std::size_t spacelike = 0; // Y, the observer to delete
    DensityState omega;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    bool allow_disconnected = false; // experimental override, no correctness claim
};

// compares B's expectation with and without Y, and iterates the deletion over
// every observer spacelike to B's zone
SignallingReport run_theorem2(const Theorem2Config& config);

struct SpacelikeReport {
    double max_commutation_dev = 0.0; // both orders of the embedded maps agree
    double correlation_gap = 0.0;     // conditioning shift minus covariance/p
    double conditional_shift = 0.0;   // conditioned minus unconditioned value
    int generators_checked = 0;
    bool pass = false;
};

// for spacelike zones: the embedded scattering maps commute, and conditioning
// on A shifts B exactly by the covariance of the induced observables over p(A)
SpacelikeReport check_spacelike_commutation(const SystemSpec& spec, const DensityState& omega,
                                            const ObserverSpec& obs_a, const Matrix& effect_a,
                                            const ObserverSpec& obs_b, double tol);

} // namespace fv
