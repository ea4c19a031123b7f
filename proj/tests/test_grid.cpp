#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpost/error.hpp"
#include "qpost/grid.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

using namespace qpost;

namespace {

constexpr double pi = std::numbers::pi;

// Continuous Fourier transform of the normalised packet
// (2 pi s^2)^(-1/4) exp(-(x - x0)^2 / 4 s^2 + i p0 x), with the 1/sqrt(2 pi)
// convention.
cplx gaussian_ft(double k, double x0, double p0, double s)
{
    return std::pow(2.0 * s * s / pi, 0.25) * std::exp(-s * s * (k - p0) * (k - p0)) *
           std::polar(1.0, -(k - p0) * x0);
}

ErrorCode code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an exception");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("grid construction is validated")
{
    CHECK(code_of([] { make_grid(1, 100, 10.0, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_grid(1, 4, 10.0, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_grid(3, 16, 10.0, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_grid(1, 16, 0.0, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_grid(1, 16, -1.0, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_grid(2, 8192, 10.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("coordinates and wavenumbers follow the DFT layout")
{
    const Grid g = make_grid(1, 16, 8.0, -4.0);
    CHECK(g.dim() == 1);
    CHECK(g.size() == 16);
    CHECK(g.dx(0) == doctest::Approx(0.5));
    CHECK(g.dk(0) == doctest::Approx(2.0 * pi / 8.0));
    CHECK(g.coords(0)[0] == -4.0);
    CHECK(g.coords(0)[15] == doctest::Approx(3.5));
    const auto k = g.wavenumbers(0);
    CHECK(k[0] == 0.0);
    CHECK(k[1] == doctest::Approx(2.0 * pi / 8.0));
    CHECK(k[8] == doctest::Approx(-pi / 0.5));  // Nyquist carries -pi/dx
    CHECK(k[15] == doctest::Approx(-2.0 * pi / 8.0));
    CHECK(g.signed_mode(8) == -8);
    CHECK(g.is_nyquist(8, 0));
    CHECK_FALSE(g.is_nyquist(7, 0));

    const Grid g2 = make_grid(2, 8, {4.0, 8.0}, {0.0, -1.0});
    CHECK(g2.size() == 64);
    // Axis 1 is contiguous.
    CHECK(g2.axis_index(9, 0) == 1);
    CHECK(g2.axis_index(9, 1) == 1);
    CHECK(g2.x_at(9, 1) == doctest::Approx(0.0));
    CHECK(g2.cell_volume() == doctest::Approx(0.5 * 1.0));
}

TEST_CASE("grids compare by value")
{
    CHECK(make_grid(1, 32, 10.0, -5.0) == make_grid(1, 32, 10.0, -5.0));
    CHECK_FALSE(make_grid(1, 32, 10.0, -5.0) == make_grid(1, 32, 10.0, -4.0));
    CHECK_FALSE(make_grid(1, 32, 10.0, -5.0) == make_grid(1, 64, 10.0, -5.0));
}

TEST_CASE("raw DFT of a delta and round trip")
{
    const Grid g = make_grid(1, 32, 1.0, 0.0);
    CVector d(32, 0.0), out(32);
    d[0] = 1.0;
    g.dft_forward(d, out);
    for (const auto& v : out) CHECK(std::abs(v - cplx(1.0)) < 1e-15);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    CVector x(32);
    for (auto& v : x) v = cplx(n(rng), n(rng));
    CVector y = x;
    g.dft_forward_inplace(y);
    g.dft_backward_inplace(y);
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(std::abs(y[j] / 32.0 - x[j]) < 1e-14);
}

TEST_CASE("forward transform matches the continuous transform of a gaussian")
{
    const Grid g = make_grid(1, 256, 40.0, -20.0);
    const double x0 = 1.5, p0 = 2.0, s = 1.0;
    const auto psi = gaussian_packet(g, x0, p0, s);
    const auto phi = to_momentum(psi);
    double worst = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m)
        worst = std::max(worst, std::abs(phi.amps[m] - gaussian_ft(g.k_at(m, 0), x0, p0, s)));
    CHECK(worst < 1e-12);
}

TEST_CASE("2-D transform of a separable packet factorises")
{
    // Boxes wide enough that the periodic images sit below 1e-13.
    const Grid g = make_grid(2, 64, {24.0, 20.0}, {-12.0, -10.0});
    const PacketAxis axes[2] = {{1.0, 1.5, 1.0}, {-0.5, -2.0, 0.8}};
    const auto psi = gaussian_packet(g, axes);
    const auto phi = to_momentum(psi);
    double worst = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
        const cplx expected = gaussian_ft(g.k_at(m, 0), 1.0, 1.5, 1.0) * gaussian_ft(g.k_at(m, 1), -0.5, -2.0, 0.8);
        worst = std::max(worst, std::abs(phi.amps[m] - expected));
    }
    CHECK(worst < 1e-11);
}

TEST_CASE("Parseval holds exactly and the transforms invert each other")
{
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, 32, 7.0, -2.0);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> n;
        CVector x(g.size());
        for (auto& v : x) v = cplx(n(rng), n(rng));
        const auto f = forward_transform(g, x);
        double a = 0.0, b = 0.0;
        for (const auto& v : x) a += std::norm(v);
        for (const auto& v : f) b += std::norm(v);
        CHECK(b * g.k_cell_volume() == doctest::Approx(a * g.cell_volume()).epsilon(1e-13));
        const auto back = inverse_transform(g, f);
        for (std::size_t j = 0; j < x.size(); ++j) CHECK(std::abs(back[j] - x[j]) < 1e-13);
    }
}

TEST_CASE("wavefunctions normalise and carry their units")
{
    const Grid g = make_grid(1, 64, 10.0, -5.0);
    const auto psi = gaussian_packet(g, 0.0, 0.0, 1.0, 2.0, 3.0);
    CHECK(psi.norm_squared() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi.hbar() == 2.0);
    CHECK(psi.mass() == 3.0);
    CHECK(std::abs(inner(psi, psi) - cplx(1.0)) < 1e-14);
    CHECK(code_of([&] { Wavefunction(g, CVector(63)); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { Wavefunction(g, CVector(64)).normalized(); }) == ErrorCode::Numeric);
    CHECK(code_of([&] { inner(psi, gaussian_packet(make_grid(1, 64, 10.0, -4.0), 0.0, 0.0, 1.0)); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("plane waves occupy a single momentum bin")
{
    const Grid g = make_grid(1, 64, 16.0, 0.0);
    const auto pw = plane_wave(g, -3);
    CHECK(pw.norm_squared() == doctest::Approx(1.0));
    const auto phi = to_momentum(pw);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (g.signed_mode(m) == -3) CHECK(std::norm(phi.amps[m]) * g.dk(0) == doctest::Approx(1.0));
        else CHECK(std::abs(phi.amps[m]) < 1e-13);
    }
    CHECK(code_of([&] { plane_wave(g, 32); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { plane_wave(g, -33); }) == ErrorCode::OutOfRange);
    CHECK_NOTHROW(plane_wave(g, -32));
}

TEST_CASE("packets reaching the domain edge warn")
{
    std::string seen;
    auto previous = set_warning_handler([&](std::string_view m) { seen = std::string(m); });
    const Grid g = make_grid(1, 64, 10.0, -5.0);
    gaussian_packet(g, 0.0, 0.0, 0.5);
    CHECK(seen.empty());
    gaussian_packet(g, 4.0, 0.0, 0.5);
    CHECK(seen.find("extends past the domain") != std::string::npos);
    set_warning_handler(previous);
}

TEST_CASE("momentum round trip restores the state")
{
    const Grid g = make_grid(1, 128, 20.0, -10.0);
    const auto psi = gaussian_packet(g, -1.0, 3.0, 0.9);
    const auto back = from_momentum(to_momentum(psi));
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(std::abs(back.amps()[j] - psi.amps()[j]) < 1e-14);
}
