#pragma once

#include "qpost/grid.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qpost {

class LinearOperator;

/// Multiplication by real samples, one per grid point.
struct DiagonalReal {
    std::vector<double> samples;
};

/// Multiplication by a real function of k, one sample per k bin (DFT order).
struct SpectralReal {
    std::vector<double> samples;
};

struct ScaledIdentity {
    cplx c;
};

struct SumOf {
    std::vector<LinearOperator> parts;
};

/// Observable in applicable form. Diagonal and spectral samples are real, so
/// those kinds are Hermitian by construction.
class LinearOperator {
public:
    using Kind = std::variant<DiagonalReal, SpectralReal, ScaledIdentity, SumOf>;

    LinearOperator(Grid grid, std::string label, Kind kind);

    const Grid& grid() const { return grid_; }
    const std::string& label() const { return label_; }
    const Kind& kind() const { return kind_; }
    bool is_hermitian() const;

private:
    Grid grid_;
    std::string label_;
    Kind kind_;
};

LinearOperator sum(std::string label, std::vector<LinearOperator> parts);
LinearOperator scaled_identity(const Grid& grid, cplx c);

/// Dense matrix form of an operator on the flattened grid.
struct DenseOperator {
    Eigen::MatrixXcd matrix;
    Grid grid;
};

/// Sampled potential together with the force field -dU/dx_axis per axis.
struct Potential {
    std::vector<double> values;
    std::vector<std::vector<double>> force;
};

/// Force by spectral differentiation of the samples (Nyquist mode dropped).
Potential make_potential(const Grid& grid, std::vector<double> values);
/// Force supplied analytically, e.g. for potentials that are not periodic.
Potential make_potential(const Grid& grid, std::vector<double> values, std::vector<std::vector<double>> force);

/// -dU/dx_axis of periodic samples via the spectral derivative.
std::vector<double> spectral_force(const Grid& grid, std::span<const double> values, int axis);

LinearOperator position_op(const Grid& grid, int axis = 0);
/// hbar * k with the Nyquist bin zeroed, which keeps the discrete operator
/// Hermitian.
LinearOperator momentum_op(const Grid& grid, int axis = 0, double hbar = 1.0);
LinearOperator potential_op(const Grid& grid, std::span<const double> values);
LinearOperator force_op(const Grid& grid, std::span<const double> values, int axis = 0);
LinearOperator force_op(const Potential& potential, const Grid& grid, int axis = 0);
LinearOperator kinetic_op(const Grid& grid, double mass = 1.0, double hbar = 1.0);
LinearOperator hamiltonian(const Grid& grid, std::span<const double> values, double mass = 1.0, double hbar = 1.0);

/// Linear action; the result is not renormalised.
Wavefunction apply(const LinearOperator& op, const Wavefunction& psi);
CVector apply(const LinearOperator& op, std::span<const cplx> amps);

struct Expectation {
    double value;
    double imag_residual;
};

/// inner(psi, op psi) split into its real value and the imaginary part, which
/// only roundoff (or a non-Hermitian operator) produces.
Expectation expectation_detail(const LinearOperator& op, const Wavefunction& psi);
/// Real expectation value; throws ErrorCode::Numeric if the imaginary part
/// exceeds 1e-10 * max(1, |value|).
double expectation(const LinearOperator& op, const Wavefunction& psi);

/// Column j is apply(op, e_j). Guarded to grids of at most 4096 points.
DenseOperator to_dense(const LinearOperator& op);
constexpr std::size_t kMaxDenseSize = 4096;

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b);
Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
/// ||M - M^dagger||_F / max(1, ||M||_F)
double hermiticity_defect(const Eigen::MatrixXcd& m);
inline double hermiticity_defect(const DenseOperator& m) { return hermiticity_defect(m.matrix); }

Wavefunction apply(const DenseOperator& op, const Wavefunction& psi);

} // namespace qpost
