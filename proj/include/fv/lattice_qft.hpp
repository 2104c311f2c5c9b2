#pragma once

// The concrete system theory: a chain of qudits under brickwork dynamics with
// a strict light cone of one site per layer. Provides the free circuit,
// Heisenberg pullback of single-site observables, deterministic local algebra
// generators, numerical support inference and the commutant-based
// localizability test.

#include "fv/causal.hpp"
#include "fv/qop.hpp"

#include <string>
#include <vector>

namespace fv {

struct BondGate {
    int left_site = 0; // acts on (left_site, left_site + 1)
    Matrix gate;       // unitary, site_dim^2 x site_dim^2
};

struct SystemSpec {
    Lattice lattice;
    int site_dim = 2;
    // layer t applies layer_gates[t]; bonds within one layer are disjoint
    std::vector<std::vector<BondGate>> layer_gates;
};

std::string site_slot_id(int x);
SlotLayout system_layout(const SystemSpec& spec);

// Even layers couple bonds starting at even sites, odd layers at odd sites;
// this alternation is what bounds operator spreading by one site per layer.
SystemSpec make_brickwork(const Lattice& lattice, int site_dim, const Matrix& bond_gate);
SystemSpec make_random_brickwork(const Lattice& lattice, int site_dim, Rng& rng);

void validate_system(const SystemSpec& spec, double tol = 1e-12);

// ordered product of brick layers t_from .. t_to-1 (later layers on the left)
Operator free_circuit(const SystemSpec& spec, int t_from, int t_to);

// time-0 representative of the single-site observable b at cell (x, t):
// U(0->t)^dagger (b at x) U(0->t)
Operator heisenberg_pullback(const SystemSpec& spec, const Matrix& b, int x, int t);

// d^2 Hermitian single-site basis: identity, then the generalized Gell-Mann
// symmetric / antisymmetric / diagonal families
std::vector<Matrix> gell_mann_basis(int d);

// pullbacks of the single-site basis at every cell of n, in cell order
std::vector<Operator> algebra_generators(const SystemSpec& spec, const Region& n);

// minimal set of sites on which a deviates from (reduced op) x identity
std::set<int> support_of(const Operator& a, double tol = 1e-10);

// true iff c commutes with every generator of the causal complement of n;
// this is the model's localizability test for "c is an observable of n"
bool commutant_membership(const SystemSpec& spec, const Operator& c, const Region& n,
                          double tol = 1e-10);

} // namespace fv
