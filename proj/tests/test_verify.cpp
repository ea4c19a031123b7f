#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpost/error.hpp"
#include "qpost/verify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

using namespace qpost;

namespace {

Trajectory synthetic(std::size_t n, double h)
{
    // <x> = sin t, <p> = cos t, <F> = -sin t: an exact Ehrenfest pair.
    Trajectory t{make_grid(1, 8, 1.0, 0.0), 1.0, 1.0, h, 1, {}, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        Record r;
        r.t = double(i) * h;
        r.norm = 1.0;
        r.x_mean[0] = std::sin(r.t);
        r.p_mean[0] = std::cos(r.t);
        r.f_mean[0] = -std::sin(r.t);
        t.times.push_back(r.t);
        t.records.push_back(r);
    }
    return t;
}

std::vector<double> harmonic(const Grid& g)
{
    std::vector<double> u(g.size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = 0.5 * g.x_at(j, 0) * g.x_at(j, 0);
    return u;
}

} // namespace

TEST_CASE("report pass rule")
{
    CHECK(make_report("a", "t", 1e-11, 1e-10).passed);
    CHECK(make_report("a", "t", 1e-10, 1e-10).passed);
    CHECK_FALSE(make_report("a", "t", 2e-10, 1e-10).passed);
    CHECK_FALSE(make_report("a", "t", 0.0, 0.0).passed);
    CHECK_FALSE(make_report("a", "t", std::nan(""), 1.0).passed);
    CHECK_FALSE(make_report("a", "t", std::numeric_limits<double>::infinity(), 1.0).passed);
}

TEST_CASE("Ehrenfest residuals use the five-point stencil and skip endpoints")
{
    const auto t = synthetic(20, 0.01);
    const auto r = ehrenfest_residuals(t);
    REQUIRE(r.velocity.size() == 20);
    for (std::size_t i : {0u, 1u, 18u, 19u}) {
        CHECK_FALSE(r.velocity[i].has_value());
        CHECK_FALSE(r.force[i].has_value());
    }
    for (std::size_t i = 2; i < 18; ++i) {
        // Fourth-order error h^4/30 |x'''''| is below 1e-9 here.
        CHECK(*r.velocity[i] < 1e-9);
        CHECK(*r.force[i] < 1e-9);
    }

    const auto short_traj = synthetic(4, 0.01);
    const auto s = ehrenfest_residuals(short_traj);
    CHECK_FALSE(s.velocity[0].has_value());
    REQUIRE(s.velocity[1].has_value());
    CHECK(*s.velocity[1] < 0.01 * 0.01 / 6.0 + 1e-12);
    CHECK_THROWS_AS(ehrenfest_residuals(synthetic(2, 0.01)), Error);

    auto uneven = synthetic(6, 0.01);
    uneven.records[3].t += 0.001;
    CHECK_THROWS_AS(ehrenfest_residuals(uneven), Error);
}

TEST_CASE("Parseval momentum on simple states")
{
    const Grid g = make_grid(1, 256, 16.0, -8.0);
    const auto pw = plane_wave(g, 7);
    CHECK(kspace_momentum(pw) == doctest::Approx(2.0 * std::numbers::pi * 7.0 / 16.0).epsilon(1e-14));
    CHECK(check_parseval_momentum(pw, 1e-12).passed);
    CHECK(check_parseval_momentum(gaussian_packet(g, 0.0, -2.0, 0.8)).passed);
}

TEST_CASE("commutator system residuals")
{
    const Grid g = make_grid(1, 128, 30.0, -15.0);
    const std::vector<Wavefunction> states{gaussian_packet(g, 0.0, 1.0, 1.0), gaussian_packet(g, 2.0, -1.0, 1.2)};

    // Free particle: [H, P] vanishes identically.
    const auto free = make_potential(g, std::vector<double>(g.size(), 0.0), {std::vector<double>(g.size(), 0.0)});
    const auto rf = commutator_system_residuals(g, free, 1.0, 1.0, states);
    CHECK(rf.momentum_relation < 1e-12);
    CHECK(rf.position_relation < 1e-8);

    std::vector<double> force(g.size());
    for (std::size_t j = 0; j < force.size(); ++j) force[j] = -g.x_at(j, 0);
    const auto pot = make_potential(g, harmonic(g), {force});
    CHECK(check_commutator_system(g, pot, 1.0, 1.0, states).passed);

    // A wrong force breaks the first relation.
    std::vector<double> wrong(force);
    for (auto& f : wrong) f *= 1.1;
    const auto bad = make_potential(g, harmonic(g), {wrong});
    CHECK(commutator_system_residuals(g, bad, 1.0, 1.0, states).momentum_relation > 1e-2);

    const auto shifted = commutator_system_residuals(g, pot, 1.0, 1.0, states, 3.0);
    const auto plain = commutator_system_residuals(g, pot, 1.0, 1.0, states);
    CHECK(std::abs(shifted.momentum_relation - plain.momentum_relation) < 1e-10);
}

TEST_CASE("commutant of X and P is one-dimensional")
{
    for (std::size_t n = 4; n <= 16; n += 2) {
        const auto r = commutant_analysis(n);
        CHECK(r.nullity == 1);
        CHECK(r.identity_alignment == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.smallest_kept_singular_value > 1e3 * r.rank_threshold);
    }
    const auto x_only = commutant_analysis(8, false);
    CHECK(x_only.nullity == 8);
    CHECK(check_commutant_uniqueness(16).passed);
    CHECK_THROWS_AS(commutant_analysis(3), Error);
    CHECK_THROWS_AS(commutant_analysis(17), Error);
}

TEST_CASE("anti-Hermitian generators give unitary exponentials")
{
    const auto r = antihermitian_exponential_residuals(16, 20, 42);
    CHECK(r.exponential_defect < 1e-12);
    CHECK(r.generator_defect < 1e-10);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    Eigen::MatrixXcd g(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) g(i, j) = cplx(d(rng), d(rng));
    const Eigen::MatrixXcd herm = 0.5 * (g + g.adjoint());
    CHECK(exponential_unitarity_defect(herm) > 1.0);
    CHECK(exponential_unitarity_defect(cplx(0.0, 1.0) * herm) < 1e-12);
}

TEST_CASE("field energy in real and wavenumber space")
{
    const Grid g = make_grid(1, 64, 2.0 * std::numbers::pi, 0.0);
    FieldConfiguration zero{g, {}, {}};
    for (int c = 0; c < 3; ++c) {
        zero.e[c].assign(64, 0.0);
        zero.h[c].assign(64, 0.0);
    }
    const auto w0 = field_energy(zero);
    CHECK(w0.real_space == 0.0);
    CHECK(w0.k_space == 0.0);

    // E_y = H_z = sin x over one period: W = 2 * (1/8 pi) * pi = 1/4.
    FieldConfiguration f = zero;
    for (std::size_t j = 0; j < 64; ++j) {
        f.e[1][j] = std::sin(g.x_at(j, 0));
        f.h[2][j] = std::sin(g.x_at(j, 0));
    }
    const auto w = field_energy(f);
    CHECK(w.real_space == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(w.k_space == doctest::Approx(0.25).epsilon(1e-13));
    // Energy sits in the k = +-1 bins.
    double in_pm1 = 0.0;
    for (std::size_t m = 0; m < 64; ++m)
        if (std::abs(std::abs(w.wavenumbers[m]) - 1.0) < 1e-12) in_pm1 += w.harmonic_energy[m] * g.dk(0);
    CHECK(in_pm1 == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(check_field_energy_parseval(f).passed);

    FieldConfiguration wrong = f;
    wrong.e[0].resize(10);
    CHECK_THROWS_AS(field_energy(wrong), Error);
}

TEST_CASE("verification config validation")
{
    VerifyConfig c;
    CHECK_NOTHROW(validate(c));
    c.tolerance_scale = -1.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = VerifyConfig{};
    c.commutant_sizes = {3};
    CHECK_THROWS_AS(validate(c), Error);
    c = VerifyConfig{};
    c.random_states = 0;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("the whole suite passes, is sorted and deterministic")
{
    VerifyConfig c;
    const auto a = run_all(c);
    CHECK(a.size() >= 10);
    std::set<std::string> names;
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO(a[i].name << " residual " << a[i].residual << " tol " << a[i].tolerance << " " << a[i].details);
        CHECK(a[i].passed);
        CHECK(names.insert(a[i].name).second);
        if (i) CHECK(a[i - 1].name < a[i].name);
    }
    const auto b = run_all(c);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].residual == b[i].residual);

    c.tolerance_scale = 0.0;
    for (const auto& r : run_all(c)) CHECK_FALSE(r.passed);
}
