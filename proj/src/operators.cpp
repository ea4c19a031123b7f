#include "qpost/operators.hpp"

#include "qpost/error.hpp"

#include <cmath>
#include <sstream>

namespace qpost {

namespace {

void check_axis(const Grid& grid, int axis)
{
    if (axis < 0 || axis >= grid.dim()) {
        std::ostringstream os;
        os << "axis " << axis << " invalid for a " << grid.dim() << "-D grid";
        fail(ErrorCode::InvalidArgument, os.str());
    }
}

void check_samples(const Grid& grid, std::span<const double> values)
{
    require(values.size() == grid.size(), ErrorCode::InvalidArgument, "potential sample count does not match the grid");
    for (double v : values) require(std::isfinite(v), ErrorCode::InvalidArgument, "potential samples must be finite reals");
}

void apply_into(const LinearOperator& op, std::span<const cplx> in, CVector& out)
{
    const Grid& grid = op.grid();
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiagonalReal>) {
                out.resize(in.size());
                for (std::size_t j = 0; j < in.size(); ++j) out[j] = k.samples[j] * in[j];
            } else if constexpr (std::is_same_v<T, SpectralReal>) {
                // The origin phases of the forward and inverse transforms cancel
                // for a diagonal k-space factor, so raw DFTs suffice.
                out.resize(in.size());
                grid.dft_forward(in, out);
                const double inv_n = 1.0 / double(in.size());
                for (std::size_t m = 0; m < out.size(); ++m) out[m] *= k.samples[m] * inv_n;
                grid.dft_backward_inplace(out);
            } else if constexpr (std::is_same_v<T, ScaledIdentity>) {
                out.resize(in.size());
                for (std::size_t j = 0; j < in.size(); ++j) out[j] = k.c * in[j];
            } else {
                out.assign(in.size(), cplx(0.0));
                CVector part;
                for (const auto& p : k.parts) {
                    apply_into(p, in, part);
                    for (std::size_t j = 0; j < in.size(); ++j) out[j] += part[j];
                }
            }
        },
        op.kind());
}

} // namespace

LinearOperator::LinearOperator(Grid grid, std::string label, Kind kind)
    : grid_(std::move(grid)), label_(std::move(label)), kind_(std::move(kind))
{
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiagonalReal> || std::is_same_v<T, SpectralReal>) {
                require(k.samples.size() == grid_.size(), ErrorCode::InvalidArgument,
                        "operator sample count does not match the grid");
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& p : k.parts)
                    require(p.grid() == grid_, ErrorCode::InvalidArgument, "sum of operators on different grids");
            }
        },
        kind_);
}

bool LinearOperator::is_hermitian() const
{
    return std::visit(
        [](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ScaledIdentity>) {
                return k.c.imag() == 0.0;
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& p : k.parts)
                    if (!p.is_hermitian()) return false;
                return true;
            } else {
                return true;
            }
        },
        kind_);
}

LinearOperator sum(std::string label, std::vector<LinearOperator> parts)
{
    require(!parts.empty(), ErrorCode::InvalidArgument, "sum needs at least one operator");
    Grid grid = parts.front().grid();
    return LinearOperator(std::move(grid), std::move(label), SumOf{std::move(parts)});
}

LinearOperator scaled_identity(const Grid& grid, cplx c) { return LinearOperator(grid, "C", ScaledIdentity{c}); }

std::vector<double> spectral_force(const Grid& grid, std::span<const double> values, int axis)
{
    check_axis(grid, axis);
    check_samples(grid, values);
    CVector buf(values.begin(), values.end());
    grid.dft_forward_inplace(buf);
    const double inv_n = 1.0 / double(buf.size());
    for (std::size_t m = 0; m < buf.size(); ++m) {
        const double k = grid.is_nyquist(m, axis) ? 0.0 : grid.k_at(m, axis);
        buf[m] *= cplx(0.0, -k * inv_n);
    }
    grid.dft_backward_inplace(buf);
    std::vector<double> out(buf.size());
    for (std::size_t j = 0; j < buf.size(); ++j) out[j] = buf[j].real();
    return out;
}

Potential make_potential(const Grid& grid, std::vector<double> values)
{
    check_samples(grid, values);
    std::vector<std::vector<double>> force;
    for (int a = 0; a < grid.dim(); ++a) force.push_back(spectral_force(grid, values, a));
    return Potential{std::move(values), std::move(force)};
}

Potential make_potential(const Grid& grid, std::vector<double> values, std::vector<std::vector<double>> force)
{
    check_samples(grid, values);
    require(int(force.size()) == grid.dim(), ErrorCode::InvalidArgument, "need one force array per axis");
    for (const auto& f : force) check_samples(grid, f);
    return Potential{std::move(values), std::move(force)};
}

LinearOperator position_op(const Grid& grid, int axis)
{
    check_axis(grid, axis);
    std::vector<double> s(grid.size());
    for (std::size_t f = 0; f < s.size(); ++f) s[f] = grid.x_at(f, axis);
    return LinearOperator(grid, axis == 0 ? "x" : "y", DiagonalReal{std::move(s)});
}

LinearOperator momentum_op(const Grid& grid, int axis, double hbar)
{
    check_axis(grid, axis);
    require(hbar > 0.0, ErrorCode::InvalidArgument, "hbar must be positive");
    std::vector<double> s(grid.size());
    for (std::size_t m = 0; m < s.size(); ++m) s[m] = grid.is_nyquist(m, axis) ? 0.0 : hbar * grid.k_at(m, axis);
    return LinearOperator(grid, axis == 0 ? "p_x" : "p_y", SpectralReal{std::move(s)});
}

LinearOperator potential_op(const Grid& grid, std::span<const double> values)
{
    check_samples(grid, values);
    return LinearOperator(grid, "U", DiagonalReal{std::vector<double>(values.begin(), values.end())});
}

LinearOperator force_op(const Grid& grid, std::span<const double> values, int axis)
{
    return LinearOperator(grid, axis == 0 ? "F_x" : "F_y", DiagonalReal{spectral_force(grid, values, axis)});
}

LinearOperator force_op(const Potential& potential, const Grid& grid, int axis)
{
    check_axis(grid, axis);
    require(int(potential.force.size()) == grid.dim(), ErrorCode::InvalidArgument, "potential has no force for this grid");
    return LinearOperator(grid, axis == 0 ? "F_x" : "F_y", DiagonalReal{potential.force[axis]});
}

LinearOperator kinetic_op(const Grid& grid, double mass, double hbar)
{
    require(mass > 0.0, ErrorCode::InvalidArgument, "mass must be positive");
    require(hbar > 0.0, ErrorCode::InvalidArgument, "hbar must be positive");
    std::vector<double> s(grid.size());
    for (std::size_t m = 0; m < s.size(); ++m) {
        double k2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) k2 += grid.k_at(m, a) * grid.k_at(m, a);
        s[m] = hbar * hbar * k2 / (2.0 * mass);
    }
    return LinearOperator(grid, "T", SpectralReal{std::move(s)});
}

LinearOperator hamiltonian(const Grid& grid, std::span<const double> values, double mass, double hbar)
{
    return sum("H", {kinetic_op(grid, mass, hbar), potential_op(grid, values)});
}

CVector apply(const LinearOperator& op, std::span<const cplx> amps)
{
    require(amps.size() == op.grid().size(), ErrorCode::InvalidArgument, "state size does not match operator grid");
    CVector out;
    apply_into(op, amps, out);
    return out;
}

Wavefunction apply(const LinearOperator& op, const Wavefunction& psi)
{
    require(op.grid() == psi.grid(), ErrorCode::InvalidArgument, "operator and state live on different grids");
    return psi.with_amps(apply(op, psi.amps()));
}

Expectation expectation_detail(const LinearOperator& op, const Wavefunction& psi)
{
    const cplx v = inner(psi, apply(op, psi));
    return Expectation{v.real(), std::abs(v.imag())};
}

double expectation(const LinearOperator& op, const Wavefunction& psi)
{
    const auto e = expectation_detail(op, psi);
    if (e.imag_residual > 1e-10 * std::max(1.0, std::abs(e.value))) {
        std::ostringstream os;
        os << "expectation of '" << op.label() << "' has imaginary part " << e.imag_residual
           << "; operator is not Hermitian";
        fail(ErrorCode::Numeric, os.str());
    }
    return e.value;
}

DenseOperator to_dense(const LinearOperator& op)
{
    const Grid& grid = op.grid();
    const std::size_t n = grid.size();
    if (n > kMaxDenseSize) {
        std::ostringstream os;
        os << "dense form limited to " << kMaxDenseSize << " grid points, grid has " << n;
        fail(ErrorCode::OutOfRange, os.str());
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(Eigen::Index(n), Eigen::Index(n));
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, DiagonalReal>) {
                for (std::size_t j = 0; j < n; ++j) m(Eigen::Index(j), Eigen::Index(j)) = k.samples[j];
            } else if constexpr (std::is_same_v<T, ScaledIdentity>) {
                for (std::size_t j = 0; j < n; ++j) m(Eigen::Index(j), Eigen::Index(j)) = k.c;
            } else if constexpr (std::is_same_v<T, SumOf>) {
                for (const auto& p : k.parts) m += to_dense(p).matrix;
            } else {
                CVector e(n, cplx(0.0));
                CVector col;
                for (std::size_t j = 0; j < n; ++j) {
                    e[j] = 1.0;
                    apply_into(op, e, col);
                    for (std::size_t i = 0; i < n; ++i) m(Eigen::Index(i), Eigen::Index(j)) = col[i];
                    e[j] = 0.0;
                }
            }
        },
        op.kind());
    return DenseOperator{std::move(m), grid};
}

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    require(a.rows() == b.rows() && a.cols() == b.cols() && a.rows() == a.cols(), ErrorCode::InvalidArgument,
            "commutator of matrices with different dimensions");
    return a * b - b * a;
}

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b)
{
    return DenseOperator{commutator(a.matrix, b.matrix), a.grid};
}

double hermiticity_defect(const Eigen::MatrixXcd& m)
{
    require(m.rows() == m.cols(), ErrorCode::InvalidArgument, "hermiticity defect of a non-square matrix");
    return (m - m.adjoint()).norm() / std::max(1.0, m.norm());
}

Wavefunction apply(const DenseOperator& op, const Wavefunction& psi)
{
    require(op.grid == psi.grid(), ErrorCode::InvalidArgument, "operator and state live on different grids");
    const auto a = psi.amps();
    Eigen::Map<const Eigen::VectorXcd> v(a.data(), Eigen::Index(a.size()));
    Eigen::VectorXcd r = op.matrix * v;
    return psi.with_amps(CVector(r.data(), r.data() + r.size()));
}

} // namespace qpost
