#include "qpost/grid.hpp"

#include "qpost/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace qpost {

namespace {

// The FFTW planner is not re-entrant; execution through the new-array
// interface is.
std::mutex g_planner_mutex;

class FftPlan {
public:
    FftPlan(int dim, int n, int sign, bool inplace)
    {
        std::lock_guard lock(g_planner_mutex);
        const std::size_t total = dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
        auto* a = fftw_alloc_complex(total);
        auto* b = inplace ? a : fftw_alloc_complex(total);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        plan_ = dim == 1 ? fftw_plan_dft_1d(n, a, b, sign, flags) : fftw_plan_dft_2d(n, n, a, b, sign, flags);
        if (!inplace) fftw_free(b);
        fftw_free(a);
        if (!plan_) fail(ErrorCode::Numeric, "FFTW failed to create a plan");
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan()
    {
        std::lock_guard lock(g_planner_mutex);
        fftw_destroy_plan(plan_);
    }

    void execute(const cplx* in, cplx* out) const
    {
        // Out-of-place complex DFTs leave their input untouched.
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

private:
    fftw_plan plan_ = nullptr;
};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace

namespace detail {

struct GridData {
    int dim = 1;
    std::size_t n = 0;
    std::array<double, 2> length{};
    std::array<double, 2> origin{};
    std::array<std::vector<double>, 2> coords;
    std::array<std::vector<double>, 2> wavenumbers;
    CVector origin_phase;
    std::unique_ptr<FftPlan> fwd, bwd, fwd_ip, bwd_ip;
};

} // namespace detail

Grid make_grid(int dim, std::size_t n, std::array<double, 2> length, std::array<double, 2> origin)
{
    require(dim == 1 || dim == 2, ErrorCode::InvalidArgument, "grid dim must be 1 or 2");
    if (!is_power_of_two(n) || n < 8) {
        std::ostringstream os;
        os << "grid n must be a power of two >= 8, got " << n;
        fail(ErrorCode::InvalidArgument, os.str());
    }
    require(dim == 1 || n <= 4096, ErrorCode::InvalidArgument, "2-D grid n must not exceed 4096");
    for (int a = 0; a < dim; ++a) {
        require(std::isfinite(length[a]) && length[a] > 0.0, ErrorCode::InvalidArgument,
                "grid length must be positive");
        require(std::isfinite(origin[a]), ErrorCode::InvalidArgument, "grid origin must be finite");
    }

    auto d = std::make_shared<detail::GridData>();
    d->dim = dim;
    d->n = n;
    d->length = length;
    d->origin = origin;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int a = 0; a < dim; ++a) {
        const double dx = length[a] / double(n);
        d->coords[a].resize(n);
        d->wavenumbers[a].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            d->coords[a][j] = origin[a] + double(j) * dx;
            const long m = j < n / 2 ? long(j) : long(j) - long(n);
            d->wavenumbers[a][j] = two_pi * double(m) / length[a];
        }
    }

    const std::size_t total = dim == 1 ? n : n * n;
    d->origin_phase.resize(total);
    for (std::size_t f = 0; f < total; ++f) {
        double phase = 0.0;
        if (dim == 1) {
            phase = d->wavenumbers[0][f] * origin[0];
        } else {
            phase = d->wavenumbers[0][f / n] * origin[0] + d->wavenumbers[1][f % n] * origin[1];
        }
        d->origin_phase[f] = std::polar(1.0, -phase);
    }

    d->fwd = std::make_unique<FftPlan>(dim, int(n), FFTW_FORWARD, false);
    d->bwd = std::make_unique<FftPlan>(dim, int(n), FFTW_BACKWARD, false);
    d->fwd_ip = std::make_unique<FftPlan>(dim, int(n), FFTW_FORWARD, true);
    d->bwd_ip = std::make_unique<FftPlan>(dim, int(n), FFTW_BACKWARD, true);
    return Grid(std::move(d));
}

Grid make_grid(int dim, std::size_t n, double length, double origin)
{
    return make_grid(dim, n, {length, length}, {origin, origin});
}

int Grid::dim() const { return data_->dim; }
std::size_t Grid::n() const { return data_->n; }
std::size_t Grid::size() const { return data_->dim == 1 ? data_->n : data_->n * data_->n; }
double Grid::length(int axis) const { return data_->length[axis]; }
double Grid::origin(int axis) const { return data_->origin[axis]; }
double Grid::dx(int axis) const { return data_->length[axis] / double(data_->n); }
double Grid::dk(int axis) const { return 2.0 * std::numbers::pi / data_->length[axis]; }

double Grid::cell_volume() const
{
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= dx(a);
    return v;
}

double Grid::k_cell_volume() const
{
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= dk(a);
    return v;
}

std::span<const double> Grid::coords(int axis) const { return data_->coords[axis]; }
std::span<const double> Grid::wavenumbers(int axis) const { return data_->wavenumbers[axis]; }

int Grid::signed_mode(std::size_t m) const
{
    const std::size_t n = data_->n;
    return m < n / 2 ? int(m) : int(m) - int(n);
}

std::size_t Grid::axis_index(std::size_t flat, int axis) const
{
    if (data_->dim == 1) return flat;
    return axis == 0 ? flat / data_->n : flat % data_->n;
}

bool Grid::is_nyquist(std::size_t flat, int axis) const { return axis_index(flat, axis) == data_->n / 2; }

void Grid::dft_forward(std::span<const cplx> in, std::span<cplx> out) const
{
    if (in.data() == out.data()) return data_->fwd_ip->execute(in.data(), out.data());
    data_->fwd->execute(in.data(), out.data());
}

void Grid::dft_backward(std::span<const cplx> in, std::span<cplx> out) const
{
    if (in.data() == out.data()) return data_->bwd_ip->execute(in.data(), out.data());
    data_->bwd->execute(in.data(), out.data());
}

void Grid::dft_forward_inplace(std::span<cplx> data) const { data_->fwd_ip->execute(data.data(), data.data()); }
void Grid::dft_backward_inplace(std::span<cplx> data) const { data_->bwd_ip->execute(data.data(), data.data()); }

std::span<const cplx> Grid::origin_phase() const { return data_->origin_phase; }

bool Grid::operator==(const Grid& other) const
{
    if (data_ == other.data_) return true;
    if (data_->dim != other.data_->dim || data_->n != other.data_->n) return false;
    for (int a = 0; a < data_->dim; ++a) {
        if (data_->length[a] != other.data_->length[a] || data_->origin[a] != other.data_->origin[a]) return false;
    }
    return true;
}

Wavefunction::Wavefunction(Grid grid, CVector amps, double hbar, double mass)
    : grid_(std::move(grid)), amps_(std::move(amps)), hbar_(hbar), mass_(mass)
{
    require(amps_.size() == grid_.size(), ErrorCode::InvalidArgument,
            "wavefunction amplitude count does not match the grid");
    require(hbar_ > 0.0, ErrorCode::InvalidArgument, "hbar must be positive");
    require(mass_ > 0.0, ErrorCode::InvalidArgument, "mass must be positive");
}

double Wavefunction::norm_squared() const
{
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s * grid_.cell_volume();
}

Wavefunction Wavefunction::normalized() const
{
    const double n2 = norm_squared();
    require(n2 > 0.0 && std::isfinite(n2), ErrorCode::Numeric, "cannot normalize a zero or non-finite state");
    const double scale = 1.0 / std::sqrt(n2);
    CVector out(amps_.size());
    for (std::size_t j = 0; j < amps_.size(); ++j) out[j] = amps_[j] * scale;
    return Wavefunction(grid_, std::move(out), hbar_, mass_);
}

Wavefunction Wavefunction::with_amps(CVector amps) const { return Wavefunction(grid_, std::move(amps), hbar_, mass_); }

cplx inner(const Wavefunction& psi, const Wavefunction& phi)
{
    require(psi.grid() == phi.grid(), ErrorCode::InvalidArgument, "inner product of states on different grids");
    const auto a = psi.amps();
    const auto b = phi.amps();
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s * psi.grid().cell_volume();
}

CVector forward_transform(const Grid& grid, std::span<const cplx> samples)
{
    require(samples.size() == grid.size(), ErrorCode::InvalidArgument, "sample count does not match the grid");
    CVector out(grid.size());
    grid.dft_forward(samples, out);
    const double scale = grid.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * grid.dim());
    const auto phase = grid.origin_phase();
    for (std::size_t m = 0; m < out.size(); ++m) out[m] *= scale * phase[m];
    return out;
}

CVector inverse_transform(const Grid& grid, std::span<const cplx> spectrum)
{
    require(spectrum.size() == grid.size(), ErrorCode::InvalidArgument, "spectrum size does not match the grid");
    const double scale = grid.k_cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * grid.dim());
    const auto phase = grid.origin_phase();
    CVector tmp(grid.size());
    for (std::size_t m = 0; m < tmp.size(); ++m) tmp[m] = spectrum[m] * std::conj(phase[m]) * scale;
    grid.dft_backward_inplace(tmp);
    return tmp;
}

MomentumAmplitudes to_momentum(const Wavefunction& psi)
{
    return MomentumAmplitudes{psi.grid(), forward_transform(psi.grid(), psi.amps())};
}

Wavefunction from_momentum(const MomentumAmplitudes& phi, double hbar, double mass)
{
    return Wavefunction(phi.grid, inverse_transform(phi.grid, phi.amps), hbar, mass);
}

Wavefunction gaussian_packet(const Grid& grid, std::span<const PacketAxis> axes, double hbar, double mass)
{
    require(int(axes.size()) == grid.dim(), ErrorCode::InvalidArgument,
            "gaussian packet needs one axis description per grid dimension");
    for (int a = 0; a < grid.dim(); ++a) {
        require(axes[a].sigma > 0.0, ErrorCode::InvalidArgument, "gaussian sigma must be positive");
        const double lo = grid.origin(a);
        const double hi = lo + grid.length(a);
        if (axes[a].x0 - 5.0 * axes[a].sigma < lo || axes[a].x0 + 5.0 * axes[a].sigma > hi) {
            std::ostringstream os;
            os << "gaussian packet on axis " << a << " (x0=" << axes[a].x0 << ", sigma=" << axes[a].sigma
               << ") extends past the domain [" << lo << ", " << hi << ") within 5 sigma";
            warn(os.str());
        }
    }
    CVector amps(grid.size());
    for (std::size_t f = 0; f < amps.size(); ++f) {
        double envelope = 0.0;
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double x = grid.x_at(f, a);
            const double u = x - axes[a].x0;
            envelope -= u * u / (4.0 * axes[a].sigma * axes[a].sigma);
            phase += axes[a].p0 * x / hbar;
        }
        amps[f] = std::polar(std::exp(envelope), phase);
    }
    return Wavefunction(grid, std::move(amps), hbar, mass).normalized();
}

Wavefunction gaussian_packet(const Grid& grid, double x0, double p0, double sigma, double hbar, double mass)
{
    require(grid.dim() == 1, ErrorCode::InvalidArgument, "scalar gaussian_packet needs a 1-D grid");
    const PacketAxis axis{x0, p0, sigma};
    return gaussian_packet(grid, std::span<const PacketAxis>(&axis, 1), hbar, mass);
}

Wavefunction plane_wave(const Grid& grid, std::array<int, 2> modes, double hbar, double mass)
{
    const int half = int(grid.n() / 2);
    double volume = 1.0;
    std::array<double, 2> k{};
    for (int a = 0; a < grid.dim(); ++a) {
        if (modes[a] < -half || modes[a] >= half) {
            std::ostringstream os;
            os << "plane wave mode " << modes[a] << " outside [" << -half << ", " << half << ")";
            fail(ErrorCode::OutOfRange, os.str());
        }
        k[a] = 2.0 * std::numbers::pi * double(modes[a]) / grid.length(a);
        volume *= grid.length(a);
    }
    const double amp = 1.0 / std::sqrt(volume);
    CVector amps(grid.size());
    for (std::size_t f = 0; f < amps.size(); ++f) {
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) phase += k[a] * grid.x_at(f, a);
        amps[f] = std::polar(amp, phase);
    }
    return Wavefunction(grid, std::move(amps), hbar, mass);
}

Wavefunction plane_wave(const Grid& grid, int mode, double hbar, double mass)
{
    require(grid.dim() == 1, ErrorCode::InvalidArgument, "scalar plane_wave needs a 1-D grid");
    return plane_wave(grid, {mode, 0}, hbar, mass);
}

} // namespace qpost
