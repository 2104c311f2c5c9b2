#include "fv/qop.hpp"

#include "fv/errors.hpp"

#include <algorithm>
#include <unordered_set>

namespace fv {

SlotLayout::SlotLayout(std::vector<Slot> slots) : slots_(std::move(slots)) {
    std::unordered_set<std::string> seen;
    for (const Slot& s : slots_) {
        if (s.dim < 1) throw DimensionMismatch("slot '" + s.id + "' has non-positive dimension");
        if (!seen.insert(s.id).second) throw SlotCollision("duplicate slot id '" + s.id + "'");
        total_ *= s.dim;
    }
}

std::optional<std::size_t> SlotLayout::find(std::string_view id) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].id == id) return i;
    return std::nullopt;
}

std::size_t SlotLayout::require(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw UnknownSlot("unknown slot '" + std::string(id) + "'");
}

std::vector<std::string> SlotLayout::ids() const {
    std::vector<std::string> out;
    out.reserve(slots_.size());
    for (const Slot& s : slots_) out.push_back(s.id);
    return out;
}

std::vector<Eigen::Index> SlotLayout::strides() const {
    std::vector<Eigen::Index> out(slots_.size(), 1);
    for (std::size_t i = slots_.size(); i-- > 1;) out[i - 1] = out[i] * slots_[i].dim;
    return out;
}

Operator make_operator(Matrix m, SlotLayout layout) {
    if (m.rows() != m.cols() || m.rows() != layout.total_dim())
        throw DimensionMismatch("operator matrix does not match layout dimension");
    return Operator{std::move(m), std::move(layout)};
}

Operator single_slot_operator(std::string slot_id, const Matrix& m) {
    if (m.rows() != m.cols()) throw DimensionMismatch("single_slot_operator: non-square matrix");
    return Operator{m, SlotLayout({Slot{std::move(slot_id), m.rows()}})};
}

Operator identity_operator(const SlotLayout& layout) {
    return Operator{Matrix::Identity(layout.total_dim(), layout.total_dim()), layout};
}

Operator tensor(const Operator& a, const Operator& b) {
    std::vector<Slot> slots = a.layout.slots();
    for (const Slot& s : b.layout.slots()) {
        if (a.layout.contains(s.id)) throw SlotCollision("tensor: slot '" + s.id + "' on both sides");
        slots.push_back(s);
    }
    const Eigen::Index da = a.dim(), db = b.dim();
    Matrix m(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            m.block(i * db, j * db, db, db) = a.mat(i, j) * b.mat;
    return Operator{std::move(m), SlotLayout(std::move(slots))};
}

namespace {

// full index -> full index under a relabelling of slot order
std::vector<Eigen::Index> permutation_map(const SlotLayout& from, const SlotLayout& to) {
    const Eigen::Index dim = from.total_dim();
    const auto from_strides = from.strides();
    std::vector<Eigen::Index> to_stride_of_from_slot(from.size());
    const auto to_strides = to.strides();
    for (std::size_t i = 0; i < from.size(); ++i)
        to_stride_of_from_slot[i] = to_strides[to.require(from.at(i).id)];
    std::vector<Eigen::Index> map(static_cast<std::size_t>(dim));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rem = idx, out = 0;
        for (std::size_t s = 0; s < from.size(); ++s) {
            const Eigen::Index digit = rem / from_strides[s];
            rem %= from_strides[s];
            out += digit * to_stride_of_from_slot[s];
        }
        map[static_cast<std::size_t>(idx)] = out;
    }
    return map;
}

} // namespace

Operator permute_slots(const Operator& a, const std::vector<std::string>& new_order) {
    if (new_order.size() != a.layout.size())
        throw DimensionMismatch("permute_slots: order must list every slot exactly once");
    std::vector<Slot> slots;
    slots.reserve(new_order.size());
    for (const std::string& id : new_order) slots.push_back(a.layout.at(a.layout.require(id)));
    SlotLayout target(std::move(slots));
    const auto map = permutation_map(a.layout, target);
    const Eigen::Index dim = a.dim();
    Matrix m(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) m(map[i], map[j]) = a.mat(i, j);
    return Operator{std::move(m), std::move(target)};
}

Operator embed(const Operator& a, const SlotLayout& target) {
    for (const Slot& s : a.layout.slots()) {
        const Slot& t = target.at(target.require(s.id));
        if (t.dim != s.dim)
            throw DimensionMismatch("embed: slot '" + s.id + "' dimension mismatch");
    }
    if (a.layout.size() == target.size() && a.layout == target) return a;
    std::vector<Slot> missing;
    for (const Slot& s : target.slots())
        if (!a.layout.contains(s.id)) missing.push_back(s);
    Operator wide = missing.empty() ? a : tensor(a, identity_operator(SlotLayout(missing)));
    return permute_slots(wide, target.ids());
}

Operator partial_trace(const Operator& a, const std::set<std::string>& drop) {
    for (const std::string& id : drop) a.layout.require(id);
    std::vector<Slot> kept;
    for (const Slot& s : a.layout.slots())
        if (!drop.contains(s.id)) kept.push_back(s);
    SlotLayout out_layout(kept);

    const Eigen::Index dim = a.dim();
    const auto strides = a.layout.strides();
    const auto out_strides = out_layout.strides();
    std::vector<Eigen::Index> keep_of(static_cast<std::size_t>(dim));
    std::vector<Eigen::Index> drop_of(static_cast<std::size_t>(dim));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rem = idx, k = 0, d = 0;
        std::size_t ki = 0;
        Eigen::Index dstride = 1;
        // decompose and re-pack; drop digits packed in slot order
        for (std::size_t s = 0; s < a.layout.size(); ++s) {
            const Eigen::Index digit = rem / strides[s];
            rem %= strides[s];
            if (drop.contains(a.layout.at(s).id)) {
                d = d * a.layout.at(s).dim + digit;
                dstride *= a.layout.at(s).dim;
            } else {
                k += digit * out_strides[ki++];
            }
        }
        (void)dstride;
        keep_of[static_cast<std::size_t>(idx)] = k;
        drop_of[static_cast<std::size_t>(idx)] = d;
    }

    Matrix m = Matrix::Zero(out_layout.total_dim(), out_layout.total_dim());
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i)
            if (drop_of[i] == drop_of[j]) m(keep_of[i], keep_of[j]) += a.mat(i, j);
    return Operator{std::move(m), std::move(out_layout)};
}

namespace {

struct GateIndexing {
    Eigen::Index gate_dim = 1;
    Eigen::Index rest_dim = 1;
    // full index of (gate multi-index g, rest index r) = full_of[g * rest_dim + r]
    std::vector<Eigen::Index> full_of;
};

GateIndexing gate_indexing(const SlotLayout& target, const SlotLayout& gate) {
    GateIndexing gi;
    const Eigen::Index dim = target.total_dim();
    const auto strides = target.strides();
    std::vector<Eigen::Index> gate_pos; // positions of gate slots within target
    for (const Slot& s : gate.slots()) {
        const std::size_t p = target.require(s.id);
        if (target.at(p).dim != s.dim)
            throw DimensionMismatch("gate slot '" + s.id + "' dimension mismatch");
        gate_pos.push_back(static_cast<Eigen::Index>(p));
        gi.gate_dim *= s.dim;
    }
    gi.rest_dim = dim / gi.gate_dim;
    gi.full_of.assign(static_cast<std::size_t>(dim), 0);
    std::vector<Eigen::Index> g_of(static_cast<std::size_t>(dim)), r_of(static_cast<std::size_t>(dim));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rem = idx, g = 0, r = 0;
        for (std::size_t s = 0; s < target.size(); ++s) {
            const Eigen::Index digit = rem / strides[s];
            rem %= strides[s];
            const auto it = std::find(gate_pos.begin(), gate_pos.end(),
                                      static_cast<Eigen::Index>(s));
            if (it != gate_pos.end()) {
                // pack gate digits in the gate's own slot order
                const std::size_t gslot = static_cast<std::size_t>(it - gate_pos.begin());
                Eigen::Index gstride = 1;
                for (std::size_t q = gate.size(); q-- > gslot + 1;) gstride *= gate.at(q).dim;
                g += digit * gstride;
            } else {
                r = r * target.at(s).dim + digit;
            }
        }
        g_of[static_cast<std::size_t>(idx)] = g;
        r_of[static_cast<std::size_t>(idx)] = r;
    }
    for (Eigen::Index idx = 0; idx < dim; ++idx)
        gi.full_of[static_cast<std::size_t>(g_of[idx] * gi.rest_dim + r_of[idx])] = idx;
    return gi;
}

} // namespace

void apply_gate_left(Operator& target, const Operator& gate) {
    const GateIndexing gi = gate_indexing(target.layout, gate.layout);
    const Eigen::Index dim = target.dim(), m = gi.gate_dim, rest = gi.rest_dim;
    Eigen::VectorXcd v(m), w(m);
    for (Eigen::Index col = 0; col < dim; ++col) {
        for (Eigen::Index r = 0; r < rest; ++r) {
            for (Eigen::Index g = 0; g < m; ++g) v(g) = target.mat(gi.full_of[g * rest + r], col);
            w.noalias() = gate.mat * v;
            for (Eigen::Index g = 0; g < m; ++g) target.mat(gi.full_of[g * rest + r], col) = w(g);
        }
    }
}

void apply_gate_right(Operator& target, const Operator& gate) {
    const GateIndexing gi = gate_indexing(target.layout, gate.layout);
    const Eigen::Index dim = target.dim(), m = gi.gate_dim, rest = gi.rest_dim;
    Eigen::RowVectorXcd v(m), w(m);
    for (Eigen::Index row = 0; row < dim; ++row) {
        for (Eigen::Index r = 0; r < rest; ++r) {
            for (Eigen::Index g = 0; g < m; ++g) v(g) = target.mat(row, gi.full_of[g * rest + r]);
            w.noalias() = v * gate.mat;
            for (Eigen::Index g = 0; g < m; ++g) target.mat(row, gi.full_of[g * rest + r]) = w(g);
        }
    }
}

Operator conjugate_by(const Operator& u, const Operator& a) {
    const Operator wide = embed(a, u.layout);
    Matrix m = u.mat * wide.mat * u.mat.adjoint();
    return Operator{std::move(m), u.layout};
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

bool approx_equal(const Matrix& a, const Matrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return (a - b).norm() <= tol;
}

bool is_hermitian(const Matrix& m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

SpectralCheck check_effect(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return {false, "non-square"};
    if (!is_hermitian(m, tol)) return {false, "not Hermitian"};
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() < -tol) return {false, "negative eigenvalue"};
    if (ev.maxCoeff() > 1.0 + tol) return {false, "eigenvalue above one"};
    return {true, ""};
}

SpectralCheck check_density(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return {false, "non-square"};
    if (!is_hermitian(m, tol)) return {false, "not Hermitian"};
    if (std::abs(m.trace() - Complex(1.0, 0.0)) > tol) return {false, "trace not one"};
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) return {false, "negative eigenvalue"};
    return {true, ""};
}

bool is_effect(const Operator& a, double tol) { return check_effect(a.mat, tol).ok; }
bool is_density(const Operator& a, double tol) { return check_density(a.mat, tol).ok; }

Matrix hermitian_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

DensityState make_density_state(Operator op, double tol) {
    const SpectralCheck c = check_density(op.mat, tol);
    if (!c.ok) throw PhysicsValidationError("not a density matrix: " + c.reason);
    return DensityState{std::move(op)};
}

namespace {

Matrix random_gaussian_matrix(Eigen::Index dim, Rng& rng) {
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = Complex(rng.gaussian(), rng.gaussian());
    return g;
}

} // namespace

Matrix random_unitary(Eigen::Index dim, Rng& rng) {
    const Matrix g = random_gaussian_matrix(dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // fix phases so the distribution is Haar
    for (Eigen::Index i = 0; i < dim; ++i) {
        const Complex d = r(i, i);
        q.col(i) *= std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0, 0.0);
    }
    return q;
}

Matrix random_density_matrix(Eigen::Index dim, Rng& rng) {
    const Matrix g = random_gaussian_matrix(dim, rng);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    return m;
}

Matrix random_effect_matrix(Eigen::Index dim, Rng& rng) {
    Eigen::VectorXd d(dim);
    for (Eigen::Index i = 0; i < dim; ++i) d(i) = rng.uniform();
    const Matrix u = random_unitary(dim, rng);
    return u * d.asDiagonal() * u.adjoint();
}

Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
    const Matrix g = random_gaussian_matrix(dim, rng);
    return (g + g.adjoint()) / 2.0;
}

Matrix random_pure_density(Eigen::Index dim, Rng& rng) {
    Eigen::VectorXcd psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) psi(i) = Complex(rng.gaussian(), rng.gaussian());
    psi.normalize();
    return psi * psi.adjoint();
}

Matrix random_unitary(Eigen::Index dim, std::uint64_t seed) {
    Rng rng(seed);
    return random_unitary(dim, rng);
}

Matrix random_density_matrix(Eigen::Index dim, std::uint64_t seed) {
    Rng rng(seed);
    return random_density_matrix(dim, rng);
}

Matrix random_effect_matrix(Eigen::Index dim, std::uint64_t seed) {
    Rng rng(seed);
    return random_effect_matrix(dim, rng);
}

} // namespace fv
