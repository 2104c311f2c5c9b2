#include "fv/lattice_qft.hpp"

#include "fv/errors.hpp"

#include <algorithm>

namespace fv {

std::string site_slot_id(int x) { return "s" + std::to_string(x); }

SlotLayout system_layout(const SystemSpec& spec) {
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(spec.lattice.width));
    for (int x = 0; x < spec.lattice.width; ++x)
        slots.push_back(Slot{site_slot_id(x), spec.site_dim});
    return SlotLayout(std::move(slots));
}

namespace {

std::vector<int> layer_bond_starts(const Lattice& lat, int t) {
    std::vector<int> out;
    for (int x = (t % 2 == 0) ? 0 : 1; x + 1 < lat.width; x += 2) out.push_back(x);
    return out;
}

} // namespace

SystemSpec make_brickwork(const Lattice& lattice, int site_dim, const Matrix& bond_gate) {
    SystemSpec spec{lattice, site_dim, {}};
    spec.layer_gates.resize(static_cast<std::size_t>(lattice.depth));
    for (int t = 0; t < lattice.depth; ++t)
        for (int x : layer_bond_starts(lattice, t))
            spec.layer_gates[static_cast<std::size_t>(t)].push_back(BondGate{x, bond_gate});
    return spec;
}

SystemSpec make_random_brickwork(const Lattice& lattice, int site_dim, Rng& rng) {
    SystemSpec spec{lattice, site_dim, {}};
    spec.layer_gates.resize(static_cast<std::size_t>(lattice.depth));
    const Eigen::Index d2 = static_cast<Eigen::Index>(site_dim) * site_dim;
    for (int t = 0; t < lattice.depth; ++t)
        for (int x : layer_bond_starts(lattice, t))
            spec.layer_gates[static_cast<std::size_t>(t)].push_back(
                BondGate{x, random_unitary(d2, rng)});
    return spec;
}

void validate_system(const SystemSpec& spec, double tol) {
    if (spec.site_dim < 2) throw DimensionMismatch("site_dim must be >= 2");
    if (spec.layer_gates.size() != static_cast<std::size_t>(spec.lattice.depth))
        throw DimensionMismatch("layer_gates must have one entry per time layer");
    const Eigen::Index d2 = static_cast<Eigen::Index>(spec.site_dim) * spec.site_dim;
    for (int t = 0; t < spec.lattice.depth; ++t) {
        std::set<int> used;
        for (const BondGate& g : spec.layer_gates[static_cast<std::size_t>(t)]) {
            if (g.left_site < 0 || g.left_site + 1 >= spec.lattice.width)
                throw DimensionMismatch("bond gate out of range");
            if (!used.insert(g.left_site).second || used.contains(g.left_site + 1))
                throw PhysicsValidationError("bond gates within one layer must be disjoint");
            used.insert(g.left_site + 1);
            if (g.gate.rows() != d2 || g.gate.cols() != d2)
                throw DimensionMismatch("bond gate has wrong dimension");
            if ((g.gate * g.gate.adjoint() - Matrix::Identity(d2, d2)).norm() > tol)
                throw PhysicsValidationError("bond gate is not unitary");
        }
    }
}

Operator free_circuit(const SystemSpec& spec, int t_from, int t_to) {
    if (t_from < 0 || t_from > t_to || t_to > spec.lattice.depth)
        throw BadWindow("free_circuit: need 0 <= t_from <= t_to <= depth");
    Operator u = identity_operator(system_layout(spec));
    for (int t = t_from; t < t_to; ++t)
        for (const BondGate& g : spec.layer_gates[static_cast<std::size_t>(t)]) {
            SlotLayout bond({Slot{site_slot_id(g.left_site), spec.site_dim},
                             Slot{site_slot_id(g.left_site + 1), spec.site_dim}});
            apply_gate_left(u, Operator{g.gate, bond});
        }
    return u;
}

Operator heisenberg_pullback(const SystemSpec& spec, const Matrix& b, int x, int t) {
    if (t < 0 || t > spec.lattice.depth) throw BadWindow("heisenberg_pullback: bad time");
    if (x < 0 || x >= spec.lattice.width) throw DimensionMismatch("site out of range");
    const Operator a = embed(single_slot_operator(site_slot_id(x), b), system_layout(spec));
    if (t == 0) return a;
    const Operator u = free_circuit(spec, 0, t);
    return Operator{u.mat.adjoint() * a.mat * u.mat, a.layout};
}

std::vector<Matrix> gell_mann_basis(int d) {
    std::vector<Matrix> out;
    out.push_back(Matrix::Identity(d, d));
    const Complex I(0.0, 1.0);
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            Matrix sym = Matrix::Zero(d, d);
            sym(j, k) = 1.0;
            sym(k, j) = 1.0;
            out.push_back(sym);
            Matrix asym = Matrix::Zero(d, d);
            asym(j, k) = -I;
            asym(k, j) = I;
            out.push_back(asym);
        }
    for (int l = 1; l < d; ++l) {
        Matrix diag = Matrix::Zero(d, d);
        for (int j = 0; j < l; ++j) diag(j, j) = 1.0;
        diag(l, l) = -static_cast<double>(l);
        diag *= std::sqrt(2.0 / (static_cast<double>(l) * (l + 1)));
        out.push_back(diag);
    }
    return out;
}

std::vector<Operator> algebra_generators(const SystemSpec& spec, const Region& n) {
    const std::vector<Matrix> basis = gell_mann_basis(spec.site_dim);
    std::vector<Operator> out;
    out.reserve(n.size() * basis.size());
    for (const Cell& c : n)
        for (const Matrix& b : basis) out.push_back(heisenberg_pullback(spec, b, c.x, c.t));
    return out;
}

std::set<int> support_of(const Operator& a, double tol) {
    std::set<int> out;
    for (std::size_t i = 0; i < a.layout.size(); ++i) {
        const std::string& id = a.layout.at(i).id;
        if (id.empty() || id[0] != 's') continue; // only system sites
        const double d = static_cast<double>(a.layout.at(i).dim);
        Operator reduced = partial_trace(a, {id});
        reduced.mat /= d;
        const Operator back = embed(reduced, a.layout);
        if ((a.mat - back.mat).norm() > tol) out.insert(std::stoi(id.substr(1)));
    }
    return out;
}

bool commutant_membership(const SystemSpec& spec, const Operator& c, const Region& n,
                          double tol) {
    const Region complement = causal_complement(spec.lattice, n);
    const double scale = std::max(c.mat.norm(), 1e-300);
    for (const Operator& g : algebra_generators(spec, complement)) {
        const Operator wide = embed(g, c.layout);
        const double dev = (c.mat * wide.mat - wide.mat * c.mat).norm() / scale;
        if (dev > tol) return false;
    }
    return true;
}

} // namespace fv
