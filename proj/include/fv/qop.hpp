#pragma once

// Dense complex operator algebra over labelled tensor slots: Kronecker
// products, embeddings, slot permutations, partial traces, spectral tests and
// seeded random states/unitaries. Matrices are row-major in slot order: the
// first slot is the most significant index digit.

#include "fv/rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fv {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

struct Slot {
    std::string id;
    Eigen::Index dim = 0;
    bool operator==(const Slot&) const = default;
};

class SlotLayout {
public:
    SlotLayout() = default;
    explicit SlotLayout(std::vector<Slot> slots); // throws SlotCollision / DimensionMismatch

    Eigen::Index total_dim() const { return total_; }
    std::size_t size() const { return slots_.size(); }
    const Slot& at(std::size_t i) const { return slots_[i]; }
    const std::vector<Slot>& slots() const { return slots_; }

    std::optional<std::size_t> find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id).has_value(); }
    std::size_t require(std::string_view id) const; // throws UnknownSlot

    std::vector<std::string> ids() const;
    // stride of slot i = product of dimensions of slots after i
    std::vector<Eigen::Index> strides() const;

    bool operator==(const SlotLayout&) const = default;

private:
    std::vector<Slot> slots_;
    Eigen::Index total_ = 1;
};

struct Operator {
    Matrix mat;
    SlotLayout layout;

    Eigen::Index dim() const { return layout.total_dim(); }
};

Operator make_operator(Matrix m, SlotLayout layout); // checks dimension
Operator single_slot_operator(std::string slot_id, const Matrix& m);
Operator identity_operator(const SlotLayout& layout);

Operator tensor(const Operator& a, const Operator& b);
Operator permute_slots(const Operator& a, const std::vector<std::string>& new_order);
// a tensored with identities on the target slots it lacks, axes in target order
Operator embed(const Operator& a, const SlotLayout& target);
Operator partial_trace(const Operator& a, const std::set<std::string>& drop);

// target <- embed(gate) * target / target * embed(gate), computed with strides
// so the cost is total_dim^2 * gate_dim instead of a full dense product
void apply_gate_left(Operator& target, const Operator& gate);
void apply_gate_right(Operator& target, const Operator& gate);

// u * embed(a) * u^dagger
Operator conjugate_by(const Operator& u, const Operator& a);

double frobenius_norm(const Matrix& m);
bool approx_equal(const Matrix& a, const Matrix& b, double tol);
bool is_hermitian(const Matrix& m, double tol);

struct SpectralCheck {
    bool ok = false;
    std::string reason; // empty when ok
};

// Hermitian, spectrum within [-tol, 1+tol]
SpectralCheck check_effect(const Matrix& m, double tol = 1e-9);
// Hermitian, eigenvalues >= -tol, trace 1 within tol
SpectralCheck check_density(const Matrix& m, double tol = 1e-9);

bool is_effect(const Operator& a, double tol = 1e-9);
bool is_density(const Operator& a, double tol = 1e-9);

// Hermitian psd square root (tiny negative eigenvalues clipped to zero)
Matrix hermitian_sqrt(const Matrix& m);

struct DensityState {
    Operator op;
};

// validating constructor for externally supplied states
DensityState make_density_state(Operator op, double tol = 1e-9);

Matrix random_unitary(Eigen::Index dim, Rng& rng);
Matrix random_density_matrix(Eigen::Index dim, Rng& rng);
Matrix random_effect_matrix(Eigen::Index dim, Rng& rng);
Matrix random_hermitian(Eigen::Index dim, Rng& rng);
Matrix random_pure_density(Eigen::Index dim, Rng& rng);

Matrix random_unitary(Eigen::Index dim, std::uint64_t seed);
Matrix random_density_matrix(Eigen::Index dim, std::uint64_t seed);
Matrix random_effect_matrix(Eigen::Index dim, std::uint64_t seed);

} // namespace fv
