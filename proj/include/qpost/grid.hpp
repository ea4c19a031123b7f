#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace qpost {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

namespace detail {
struct GridData;
}

/// Periodic sample grid in one or two dimensions together with its dual
/// wavenumber grid.
///
/// Points are stored row-major: the flat index of (i0, i1) is i0 * n + i1, so
/// axis 1 is contiguous. Wavenumbers follow the usual DFT ordering
/// k_m = 2*pi*m'/L with m' = 0, 1, ..., n/2-1, -n/2, ..., -1.
///
/// Copies are cheap and share the precomputed coordinate tables and FFT
/// plans. All member functions are safe to call concurrently.
class Grid {
public:
    int dim() const;
    std::size_t n() const;
    std::size_t size() const;

    double length(int axis) const;
    double origin(int axis) const;
    double dx(int axis) const;
    double dk(int axis) const;
    double cell_volume() const;
    double k_cell_volume() const;

    std::span<const double> coords(int axis) const;
    std::span<const double> wavenumbers(int axis) const;

    /// Signed mode number m' of DFT slot m.
    int signed_mode(std::size_t m) const;
    std::size_t axis_index(std::size_t flat, int axis) const;
    double x_at(std::size_t flat, int axis) const { return coords(axis)[axis_index(flat, axis)]; }
    double k_at(std::size_t flat, int axis) const { return wavenumbers(axis)[axis_index(flat, axis)]; }
    bool is_nyquist(std::size_t flat, int axis) const;

    // Raw unnormalised DFTs, out_m = sum_j in_j exp(-/+ 2 pi i m.j / n).
    // in and out may alias only if they are the same span.
    void dft_forward(std::span<const cplx> in, std::span<cplx> out) const;
    void dft_backward(std::span<const cplx> in, std::span<cplx> out) const;
    void dft_forward_inplace(std::span<cplx> data) const;
    void dft_backward_inplace(std::span<cplx> data) const;

    /// exp(-i k_m . x0) for every k bin; folds the grid origin into the DFT.
    std::span<const cplx> origin_phase() const;

    bool operator==(const Grid& other) const;

private:
    explicit Grid(std::shared_ptr<const detail::GridData> data) : data_(std::move(data)) {}
    std::shared_ptr<const detail::GridData> data_;

    friend Grid make_grid(int, std::size_t, std::array<double, 2>, std::array<double, 2>);
};

/// n must be a power of two >= 8 and every length positive.
Grid make_grid(int dim, std::size_t n, std::array<double, 2> length, std::array<double, 2> origin);
Grid make_grid(int dim, std::size_t n, double length, double origin);

/// Scalar wavefunction on a grid, carrying the unit system (hbar, mass).
class Wavefunction {
public:
    Wavefunction(Grid grid, CVector amps, double hbar = 1.0, double mass = 1.0);

    const Grid& grid() const { return grid_; }
    std::span<const cplx> amps() const { return amps_; }
    double hbar() const { return hbar_; }
    double mass() const { return mass_; }

    /// sum_j |psi_j|^2 dx^dim
    double norm_squared() const;
    Wavefunction normalized() const;
    Wavefunction with_amps(CVector amps) const;

private:
    Grid grid_;
    CVector amps_;
    double hbar_;
    double mass_;
};

struct MomentumAmplitudes {
    Grid grid;
    CVector amps;  // DFT k ordering
};

cplx inner(const Wavefunction& psi, const Wavefunction& phi);

// Phi_m = dx^dim / (2 pi)^(dim/2) * sum_j psi_j exp(-i k_m . x_j); the inverse
// uses dk^dim / (2 pi)^(dim/2). With these weights the discrete Parseval
// identity sum |Phi|^2 dk^dim = sum |psi|^2 dx^dim holds exactly.
CVector forward_transform(const Grid& grid, std::span<const cplx> samples);
CVector inverse_transform(const Grid& grid, std::span<const cplx> spectrum);

MomentumAmplitudes to_momentum(const Wavefunction& psi);
Wavefunction from_momentum(const MomentumAmplitudes& phi, double hbar = 1.0, double mass = 1.0);

struct PacketAxis {
    double x0 = 0.0;
    double p0 = 0.0;
    double sigma = 1.0;
};

/// psi ~ exp(-(x - x0)^2 / (4 sigma^2) + i p0 x / hbar) per axis, normalised;
/// sigma is the position standard deviation.
Wavefunction gaussian_packet(const Grid& grid, std::span<const PacketAxis> axes, double hbar = 1.0,
                             double mass = 1.0);
Wavefunction gaussian_packet(const Grid& grid, double x0, double p0, double sigma, double hbar = 1.0,
                             double mass = 1.0);

/// Single normalised harmonic exp(i k_m x) / sqrt(L).
Wavefunction plane_wave(const Grid& grid, int mode, double hbar = 1.0, double mass = 1.0);
Wavefunction plane_wave(const Grid& grid, std::array<int, 2> modes, double hbar = 1.0, double mass = 1.0);

} // namespace qpost
