#include "qpost/verify.hpp"

#include "qpost/error.hpp"
#include "qpost/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace qpost {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double l2_norm(std::span<const cplx> v, double dv)
{
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s * dv);
}

double l2_distance(std::span<const cplx> a, std::span<const cplx> b, double dv)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
    return std::sqrt(s * dv);
}

Eigen::MatrixXcd random_complex(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(gauss(rng), gauss(rng));
    return g;
}

} // namespace

CheckReport make_report(std::string name, std::string tag, double residual, double tolerance, std::string details)
{
    CheckReport r{std::move(name), std::move(tag), residual, tolerance, false, std::move(details)};
    r.passed = std::isfinite(residual) && tolerance > 0.0 && residual <= tolerance;
    return r;
}

CheckReport check_normalization(const Trajectory& trajectory, double tolerance)
{
    require(!trajectory.records.empty(), ErrorCode::InvalidArgument, "check_normalization: empty trajectory");
    double worst = 0.0;
    for (const auto& r : trajectory.records) worst = std::max(worst, std::abs(r.norm - 1.0));
    return make_report("normalization", "P1-normalization", worst, tolerance,
                       "records=" + std::to_string(trajectory.records.size()));
}

CheckReport check_normalization(const Wavefunction& psi, double tolerance)
{
    return make_report("normalization", "P1-normalization", std::abs(psi.norm_squared() - 1.0), tolerance);
}

double kspace_momentum(const Wavefunction& psi, int axis)
{
    const auto phi = to_momentum(psi);
    const Grid& grid = psi.grid();
    require(axis >= 0 && axis < grid.dim(), ErrorCode::InvalidArgument, "kspace_momentum: bad axis");
    double p = 0.0;
    for (std::size_t m = 0; m < phi.amps.size(); ++m) {
        if (grid.is_nyquist(m, axis)) continue;
        p += psi.hbar() * grid.k_at(m, axis) * std::norm(phi.amps[m]);
    }
    return p * grid.k_cell_volume();
}

CheckReport check_parseval_momentum(const Wavefunction& psi, double tolerance)
{
    const double via_k = kspace_momentum(psi);
    const double via_op = expectation(momentum_op(psi.grid(), 0, psi.hbar()), psi);
    return make_report("parseval_momentum", "P2-momentum", std::abs(via_k - via_op), tolerance,
                       "k_space=" + fmt(via_k) + " operator=" + fmt(via_op));
}

EhrenfestResiduals ehrenfest_residuals(const Trajectory& t, int axis)
{
    const std::size_t n = t.records.size();
    require(n >= 3, ErrorCode::InvalidArgument, "Ehrenfest checks need at least 3 recorded times");
    const double h = t.records[1].t - t.records[0].t;
    require(h > 0.0, ErrorCode::InvalidArgument, "Ehrenfest checks need increasing record times");
    for (std::size_t i = 1; i < n; ++i) {
        const double gap = t.records[i].t - t.records[i - 1].t;
        require(std::abs(gap - h) <= 1e-9 * h, ErrorCode::InvalidArgument,
                "Ehrenfest checks need a uniform recording interval");
    }

    auto derivative = [&](std::size_t i, auto get) -> std::optional<double> {
        if (n >= 5) {
            if (i < 2 || i + 2 >= n) return std::nullopt;
            return (-get(i + 2) + 8.0 * get(i + 1) - 8.0 * get(i - 1) + get(i - 2)) / (12.0 * h);
        }
        if (i < 1 || i + 1 >= n) return std::nullopt;
        return (get(i + 1) - get(i - 1)) / (2.0 * h);
    };
    auto x = [&](std::size_t i) { return t.records[i].x_mean[axis]; };
    auto p = [&](std::size_t i) { return t.records[i].p_mean[axis]; };

    EhrenfestResiduals out;
    out.velocity.resize(n);
    out.force.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto dx = derivative(i, x)) out.velocity[i] = std::abs(*dx - t.records[i].p_mean[axis] / t.mass);
        if (auto dp = derivative(i, p)) out.force[i] = std::abs(*dp - t.records[i].f_mean[axis]);
    }
    return out;
}

namespace {

double worst(const std::vector<std::optional<double>>& v)
{
    double w = 0.0;
    for (const auto& x : v)
        if (x) w = std::max(w, *x);
    return w;
}

} // namespace

CheckReport check_ehrenfest_velocity(const Trajectory& trajectory, double tolerance, int axis)
{
    const auto r = ehrenfest_residuals(trajectory, axis);
    return make_report("ehrenfest_velocity", "P5-velocity", worst(r.velocity), tolerance,
                       "h=" + fmt(trajectory.record_interval()) + " dt=" + fmt(trajectory.dt));
}

CheckReport check_ehrenfest_force(const Trajectory& trajectory, double tolerance, int axis)
{
    const auto r = ehrenfest_residuals(trajectory, axis);
    return make_report("ehrenfest_force", "P4-force", worst(r.force), tolerance,
                       "h=" + fmt(trajectory.record_interval()) + " dt=" + fmt(trajectory.dt));
}

CommutatorResiduals commutator_system_residuals(const Grid& grid, const Potential& potential, double mass, double hbar,
                                                std::span<const Wavefunction> test_states, double constant_shift)
{
    require(grid.dim() == 1, ErrorCode::InvalidArgument, "commutator checks run on 1-D grids");
    require(!test_states.empty(), ErrorCode::InvalidArgument, "commutator checks need test states");
    Eigen::MatrixXcd h = to_dense(hamiltonian(grid, potential.values, mass, hbar)).matrix;
    h.diagonal().array() += constant_shift;
    const Eigen::MatrixXcd x = to_dense(position_op(grid)).matrix;
    const Eigen::MatrixXcd p = to_dense(momentum_op(grid, 0, hbar)).matrix;
    const cplx i_over_hbar(0.0, 1.0 / hbar);
    const double dv = grid.cell_volume();

    CommutatorResiduals out;
    for (const auto& psi : test_states) {
        require(psi.grid() == grid, ErrorCode::InvalidArgument, "test state lives on another grid");
        Eigen::Map<const Eigen::VectorXcd> v(psi.amps().data(), Eigen::Index(psi.amps().size()));
        const Eigen::VectorXcd pv = p * v;
        const Eigen::VectorXcd hv = h * v;

        Eigen::VectorXcd r1 = i_over_hbar * (h * pv - p * hv);
        for (Eigen::Index j = 0; j < r1.size(); ++j) r1(j) -= potential.force[0][std::size_t(j)] * v(j);
        Eigen::VectorXcd r2 = i_over_hbar * (h * (x * v) - x * hv) - pv / mass;

        out.momentum_relation = std::max(out.momentum_relation, l2_norm({r1.data(), std::size_t(r1.size())}, dv));
        out.position_relation = std::max(out.position_relation, l2_norm({r2.data(), std::size_t(r2.size())}, dv));
    }
    return out;
}

CheckReport check_commutator_system(const Grid& grid, const Potential& potential, double mass, double hbar,
                                    std::span<const Wavefunction> test_states, double tolerance)
{
    const auto r = commutator_system_residuals(grid, potential, mass, hbar, test_states);
    return make_report("commutator_system", "generator-commutators", std::max(r.momentum_relation, r.position_relation),
                       tolerance,
                       "[H,P]=" + fmt(r.momentum_relation) + " [H,X]=" + fmt(r.position_relation) +
                           " states=" + std::to_string(test_states.size()));
}

CommutantResult commutant_analysis(std::size_t n, bool include_momentum)
{
    require(n >= 4 && n <= 16, ErrorCode::InvalidArgument, "commutant analysis needs 4 <= n <= 16");
    const auto ni = Eigen::Index(n);
    // Unit spacing, distinct coordinates centred on zero.
    const double length = double(n);
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(ni, ni);
    for (Eigen::Index j = 0; j < ni; ++j) x(j, j) = double(j) - 0.5 * length;

    // P_jl = (1/n) sum_m k_m exp(i k_m (x_j - x_l)), Nyquist mode dropped.
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(ni, ni);
    for (Eigen::Index j = 0; j < ni; ++j) {
        for (Eigen::Index l = 0; l < ni; ++l) {
            cplx s = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const long mm = m < n / 2 ? long(m) : long(m) - long(n);
                if (n % 2 == 0 && m == n / 2) continue;
                const double k = 2.0 * std::numbers::pi * double(mm) / length;
                s += k * std::polar(1.0, k * double(j - l));
            }
            p(j, l) = s / double(n);
        }
    }

    // Column-major vec: the coefficient of M_ab in ([M, A])_ij is
    // A_bj delta_ai - A_ia delta_bj.
    const Eigen::Index nn = ni * ni;
    const int blocks = include_momentum ? 2 : 1;
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(blocks * nn, nn);
    auto fill = [&](const Eigen::MatrixXcd& a, Eigen::Index offset) {
        for (Eigen::Index i = 0; i < ni; ++i) {
            for (Eigen::Index j = 0; j < ni; ++j) {
                const Eigen::Index row = offset + i + j * ni;
                for (Eigen::Index b = 0; b < ni; ++b) k(row, i + b * ni) += a(b, j);
                for (Eigen::Index a_ = 0; a_ < ni; ++a_) k(row, a_ + j * ni) -= a(i, a_);
            }
        }
    };
    fill(x, 0);
    if (include_momentum) fill(p, nn);

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    CommutantResult out;
    out.n = n;
    out.rank_threshold = 1e-9 * std::max(1.0, sv(0));
    out.smallest_kept_singular_value = std::numeric_limits<double>::infinity();
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= out.rank_threshold) {
            null_cols.push_back(i);
            out.largest_null_singular_value = std::max(out.largest_null_singular_value, sv(i));
        } else {
            out.smallest_kept_singular_value = std::min(out.smallest_kept_singular_value, sv(i));
        }
    }
    out.nullity = null_cols.size();

    // Largest overlap of any null-space vector with vec(I): the norm of the
    // projection of the unit identity onto the (orthonormal) null basis.
    Eigen::VectorXcd id = Eigen::VectorXcd::Zero(nn);
    for (Eigen::Index i = 0; i < ni; ++i) id(i + i * ni) = 1.0;
    id /= std::sqrt(double(n));
    double proj2 = 0.0;
    for (Eigen::Index c : null_cols) proj2 += std::norm(svd.matrixV().col(c).dot(id));
    out.identity_alignment = std::sqrt(proj2);
    return out;
}

CheckReport check_commutant_uniqueness(std::size_t n, double tolerance)
{
    const auto r = commutant_analysis(n, true);
    const double residual = std::abs(double(r.nullity) - 1.0) + std::abs(1.0 - r.identity_alignment);
    return make_report("commutant_uniqueness_n" + std::to_string(n), "generator-commutant", residual, tolerance,
                       "nullity=" + std::to_string(r.nullity) + " identity_alignment=" + fmt(r.identity_alignment) +
                           " smallest_kept_sv=" + fmt(r.smallest_kept_singular_value));
}

double exponential_unitarity_defect(const Eigen::MatrixXcd& a) { return unitarity_defect(normal_exponential(a)); }

AntiHermitianResult antihermitian_exponential_residuals(std::size_t n, std::size_t n_random, std::uint64_t seed)
{
    require(n >= 1 && n <= 64, ErrorCode::InvalidArgument, "anti-Hermitian check needs 1 <= n <= 64");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    AntiHermitianResult out;
    const double delta = 1e-4;
    for (std::size_t trial = 0; trial < n_random; ++trial) {
        // (a) anti-Hermitian A gives a unitary exp(A).
        const Eigen::MatrixXcd g = random_complex(n, rng);
        const Eigen::MatrixXcd a = 0.5 * (g - g.adjoint());
        out.exponential_defect = std::max(out.exponential_defect, exponential_unitarity_defect(a));

        // (b) a unitary one-parameter family W(t) = Q diag(exp(i theta t)) Q^dagger
        // has an anti-Hermitian derivative at t = 0.
        const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_complex(n, rng)).householderQ();
        Eigen::VectorXd theta(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = gauss(rng);
        auto family = [&](double t) {
            Eigen::VectorXcd d(theta.size());
            for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::polar(1.0, theta(i) * t);
            return Eigen::MatrixXcd(q * d.asDiagonal() * q.adjoint());
        };
        const Eigen::MatrixXcd gen = (family(delta) - family(-delta)) / (2.0 * delta);
        out.generator_defect =
            std::max(out.generator_defect, (gen + gen.adjoint()).norm() / std::max(1.0, gen.norm()));
    }
    return out;
}

CheckReport check_antihermitian_exponential(std::size_t n, std::size_t n_random, std::uint64_t seed, double tolerance)
{
    const auto r = antihermitian_exponential_residuals(n, n_random, seed);
    return make_report("antihermitian_exponential", "generator-antihermitian",
                       std::max(r.exponential_defect, r.generator_defect), tolerance,
                       "exp_unitarity=" + fmt(r.exponential_defect) + " generator_defect=" + fmt(r.generator_defect) +
                           " trials=" + std::to_string(n_random) + " n=" + std::to_string(n));
}

FieldEnergy field_energy(const FieldConfiguration& f)
{
    const Grid& grid = f.grid;
    require(grid.dim() == 1, ErrorCode::InvalidArgument, "field configurations live on 1-D grids");
    for (int c = 0; c < 3; ++c)
        require(f.e[c].size() == grid.size() && f.h[c].size() == grid.size(), ErrorCode::InvalidArgument,
                "field component length does not match the grid");

    const double inv8pi = 1.0 / (8.0 * std::numbers::pi);
    FieldEnergy out;
    out.harmonic_energy.assign(grid.size(), 0.0);
    const auto ks = grid.wavenumbers(0);
    out.wavenumbers.assign(ks.begin(), ks.end());
    double real_sum = 0.0;
    for (const auto* comp : {&f.e, &f.h}) {
        for (int c = 0; c < 3; ++c) {
            const auto& s = (*comp)[c];
            CVector z(s.begin(), s.end());
            for (double v : s) real_sum += v * v;
            const CVector spec = forward_transform(grid, z);
            for (std::size_t m = 0; m < spec.size(); ++m) out.harmonic_energy[m] += std::norm(spec[m]) * inv8pi;
        }
    }
    out.real_space = real_sum * inv8pi * grid.dx(0);
    double k_sum = 0.0;
    for (double w : out.harmonic_energy) k_sum += w;
    out.k_space = k_sum * grid.dk(0);
    return out;
}

CheckReport check_field_energy_parseval(const FieldConfiguration& fields, double tolerance)
{
    const auto w = field_energy(fields);
    const double residual = std::abs(w.real_space - w.k_space) / std::max(w.real_space, 1e-300);
    return make_report("field_energy_parseval", "field-energy", residual, tolerance,
                       "W_real=" + fmt(w.real_space) + " W_k=" + fmt(w.k_space));
}

void validate(const VerifyConfig& c)
{
    auto bad = [](const std::string& key, const std::string& msg) { fail(ErrorCode::Config, key + ": " + msg); };
    if (!std::isfinite(c.tolerance_scale) || c.tolerance_scale < 0.0) bad("tolerance_scale", "must be >= 0");
    if (c.random_states < 1) bad("random_states", "must be at least 1");
    if (c.field_trials < 1) bad("field_trials", "must be at least 1");
    if (c.antihermitian_trials < 1) bad("antihermitian_trials", "must be at least 1");
    if (c.antihermitian_size < 1 || c.antihermitian_size > 64) bad("antihermitian_size", "must be in [1, 64]");
    for (auto n : c.commutant_sizes)
        if (n < 4 || n > 16) bad("commutant_sizes", "entries must be in [4, 16]");
}

namespace {

// Shared setups for the suite.

ScenarioConfig harmonic_config(std::size_t steps, std::size_t record_every)
{
    ScenarioConfig c;
    c.name = "harmonic";
    c.grid = GridSpec{1, 256, {20.0, 20.0}, {-10.0, -10.0}};
    c.potential = HarmonicSpec{1.0};
    c.initial = {PacketAxis{1.0, 0.0, std::sqrt(0.5)}};
    c.dt = 1e-3;
    c.steps = steps;
    c.record_every = record_every;
    return c;
}

ScenarioConfig quartic_config()
{
    ScenarioConfig c;
    c.name = "quartic";
    c.grid = GridSpec{1, 256, {20.0, 20.0}, {-10.0, -10.0}};
    c.potential = QuarticSpec{0.25};
    c.initial = {PacketAxis{1.0, 0.0, 0.5}};
    c.dt = 1e-3;
    c.steps = 5000;
    c.record_every = 10;
    return c;
}

DenseOperator small_harmonic(const Grid& grid, double drive, double omega = 1.0)
{
    std::vector<double> u(grid.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = grid.x_at(j, 0);
        u[j] = 0.5 * omega * omega * x * x + drive * x;
    }
    return to_dense(hamiltonian(grid, u));
}

double relative_frobenius(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

std::vector<CheckReport> dynamics_checks(double scale)
{
    std::vector<CheckReport> out;
    const auto harmonic = run(harmonic_config(10000, 10), false);

    auto norm = check_normalization(harmonic, 1e-10 * scale);
    norm.name = "normalization_harmonic";
    out.push_back(norm);

    auto v = check_ehrenfest_velocity(harmonic, 1e-5 * scale);
    v.name = "ehrenfest_velocity_harmonic";
    out.push_back(v);
    auto f = check_ehrenfest_force(harmonic, 1e-5 * scale);
    f.name = "ehrenfest_force_harmonic";
    out.push_back(f);

    double classical = 0.0;
    for (const auto& r : harmonic.records) {
        if (r.t > 2.0 * std::numbers::pi) break;
        classical = std::max(classical, std::abs(r.x_mean[0] - std::cos(r.t)));
    }
    out.push_back(make_report("classical_limit_harmonic", "P4-P5-classical-limit", classical, 1e-4 * scale,
                              "max |<x>(t) - cos t| over one period"));

    const auto quartic = run(quartic_config(), false);
    auto qv = check_ehrenfest_velocity(quartic, 1e-4 * scale);
    qv.name = "ehrenfest_velocity_quartic";
    out.push_back(qv);
    auto qf = check_ehrenfest_force(quartic, 1e-4 * scale);
    qf.name = "ehrenfest_force_quartic";
    out.push_back(qf);
    return out;
}

CheckReport gauge_check(double scale)
{
    // H + C I only changes the global phase.
    const auto c = harmonic_config(2000, 10);
    const auto s = build(c);
    Potential shifted = s.potential;
    for (double& u : shifted.values) u += 7.25;
    const SplitStepOptions opts{c.dt, c.steps, c.record_every, false};
    const auto a = split_step(s.psi0, s.potential, opts);
    const auto b = split_step(s.psi0, shifted, opts);
    const auto ra = ehrenfest_residuals(a);
    const auto rb = ehrenfest_residuals(b);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        diff = std::max(diff, std::abs(a.records[i].x_mean[0] - b.records[i].x_mean[0]));
        diff = std::max(diff, std::abs(a.records[i].p_mean[0] - b.records[i].p_mean[0]));
        if (ra.velocity[i]) diff = std::max(diff, std::abs(*ra.velocity[i] - *rb.velocity[i]));
        if (ra.force[i]) diff = std::max(diff, std::abs(*ra.force[i] - *rb.force[i]));
    }
    return make_report("gauge_invariance", "generator-constant", diff, 1e-10 * scale,
                       "C=7.25, max change of <x>, <p> and Ehrenfest residuals");
}

std::vector<CheckReport> momentum_checks(const VerifyConfig& cfg, double scale)
{
    std::vector<CheckReport> out;
    const Grid grid = make_grid(1, 256, 40.0, -20.0);
    auto g = check_parseval_momentum(gaussian_packet(grid, 0.0, 2.0, 1.0), 1e-10 * scale);
    g.name = "parseval_momentum_gaussian";
    out.push_back(g);

    const Grid small = make_grid(1, 256, 16.0, -8.0);
    const auto pw = plane_wave(small, 3);
    auto p = check_parseval_momentum(pw, 1e-12 * scale);
    const double expected = 2.0 * std::numbers::pi * 3.0 / 16.0;
    p.residual = std::max({p.residual, std::abs(kspace_momentum(pw) - expected)});
    p = make_report("parseval_momentum_plane_wave", p.tag, p.residual, 1e-12 * scale, p.details + " hbar*k3=" + fmt(expected));
    out.push_back(p);

    std::mt19937_64 rng(cfg.seed ^ 0x5eed0001ULL);
    std::normal_distribution<double> gauss;
    double worst_r = 0.0;
    for (std::size_t t = 0; t < cfg.random_states; ++t) {
        CVector amps(grid.size());
        for (auto& a : amps) a = cplx(gauss(rng), gauss(rng));
        const auto psi = Wavefunction(grid, std::move(amps)).normalized();
        worst_r = std::max(worst_r, check_parseval_momentum(psi, 1.0).residual);
    }
    out.push_back(make_report("parseval_momentum_random", "P2-momentum", worst_r, 1e-10 * scale,
                              "states=" + std::to_string(cfg.random_states)));

    // Rescaling an unnormalised state and renormalising changes nothing.
    const auto base = gaussian_packet(grid, -1.5, 0.75, 1.3);
    CVector scaled(base.amps().begin(), base.amps().end());
    for (auto& a : scaled) a *= cplx(3.7, -1.2);
    const auto renorm = base.with_amps(std::move(scaled)).normalized();
    double diff = 0.0;
    for (const auto& op : {position_op(grid), momentum_op(grid), kinetic_op(grid)})
        diff = std::max(diff, std::abs(expectation(op, base) - expectation(op, renorm)));
    out.push_back(make_report("normalization_scaling", "P3-normalization", diff, 1e-12 * scale,
                              "alpha=3.7-1.2i on <x>, <p>, <T>"));
    return out;
}

std::vector<CheckReport> commutator_checks(const VerifyConfig& cfg, double scale)
{
    std::vector<CheckReport> out;
    ScenarioConfig c = harmonic_config(1, 1);
    c.grid = GridSpec{1, 256, {40.0, 40.0}, {-20.0, -20.0}};
    const Grid grid = make_grid(1, 256, 40.0, -20.0);
    const Potential pot = sample_potential(grid, c);
    const std::vector<Wavefunction> states{
        gaussian_packet(grid, 0.0, 0.0, 1.0), gaussian_packet(grid, -3.0, 1.0, 1.0),
        gaussian_packet(grid, 2.5, -1.5, 1.2), gaussian_packet(grid, 5.0, 0.5, 0.8),
        gaussian_packet(grid, -5.0, 2.0, 1.0)};
    out.push_back(check_commutator_system(grid, pot, 1.0, 1.0, states, 1e-6 * scale));
    out.back().name = "commutator_system_harmonic";

    const auto plain = commutator_system_residuals(grid, pot, 1.0, 1.0, states, 0.0);
    const auto shifted = commutator_system_residuals(grid, pot, 1.0, 1.0, states, 7.25);
    const double d = std::max(std::abs(plain.momentum_relation - shifted.momentum_relation),
                              std::abs(plain.position_relation - shifted.position_relation));
    out.push_back(make_report("commutator_system_constant_shift", "generator-constant", d, 1e-10 * scale,
                              "H -> H + 7.25 I leaves both residuals unchanged"));

    for (auto n : cfg.commutant_sizes) out.push_back(check_commutant_uniqueness(n, 1e-8 * scale));

    const auto control = commutant_analysis(8, false);
    out.push_back(make_report("commutant_position_only_control", "generator-commutant",
                              std::abs(double(control.nullity) - 8.0), 0.5 * scale,
                              "nullity=" + std::to_string(control.nullity) + " (all diagonals expected)"));
    return out;
}

std::vector<CheckReport> generator_checks(const VerifyConfig& cfg, double scale)
{
    std::vector<CheckReport> out;
    auto ah = check_antihermitian_exponential(cfg.antihermitian_size, cfg.antihermitian_trials, cfg.seed ^ 0x5eed0002ULL,
                                              1e-10 * scale);
    out.push_back(ah);

    std::mt19937_64 rng(cfg.seed ^ 0x5eed0003ULL);
    const Eigen::MatrixXcd g = random_complex(cfg.antihermitian_size, rng);
    const Eigen::MatrixXcd herm = 0.5 * (g + g.adjoint());
    const double defect = exponential_unitarity_defect(herm);
    const bool control_failed = !(defect <= 1e-10);
    out.push_back(make_report("antihermitian_hermitian_control", "generator-antihermitian", control_failed ? 0.0 : 1.0,
                              0.5 * scale, "exp(Hermitian) unitarity defect=" + fmt(defect) + " (must fail)"));

    const Grid grid = make_grid(1, 32, 16.0, -8.0);
    const HamiltonianFn constant = [h = small_harmonic(grid, 0.0)](double) { return h; };
    const HamiltonianFn driven = [grid](double t) { return small_harmonic(grid, 0.1 * std::sin(t)); };

    const auto u01 = evolution_operator(constant, 0.0, 1.0, 2);
    out.push_back(make_report("evolution_unitarity", "evolution-operator", unitarity_defect(u01.matrix), 1e-9 * scale,
                              "n=32 U(0,1)"));

    double comp = 0.0;
    for (const auto* h : {&constant, &driven}) {
        const auto a = evolution_operator(*h, 0.0, 1.0, 8);
        const auto b = evolution_operator(*h, 1.0, 2.0, 8);
        const auto ab = evolution_operator(*h, 0.0, 2.0, 16);
        comp = std::max(comp, (b.matrix * a.matrix - ab.matrix).norm());
    }
    out.push_back(make_report("evolution_composition", "evolution-operator", comp, 1e-10 * scale,
                              "||U(1,2) U(0,1) - U(0,2)||_F, constant and driven"));

    double inv = 0.0;
    for (const auto* h : {&constant, &driven}) {
        const auto fwd = evolution_operator(*h, 0.0, 1.0, 8);
        const auto bwd = evolution_operator(*h, 1.0, 0.0, 8);
        inv = std::max(inv, (fwd.matrix * bwd.matrix - Eigen::MatrixXcd::Identity(32, 32)).norm());
    }
    out.push_back(make_report("evolution_inverse", "evolution-operator", inv, 1e-9 * scale, "||U(0,1) U(1,0) - I||_F"));

    // The central-difference error is about delta^2 E^2 / 6 relative, so the
    // spectrum of H must stay modest: omega = 1/2 on a 20-wide box keeps both
    // the kinetic and the potential cut-offs near 12.
    const Grid wide = make_grid(1, 32, 20.0, -10.0);
    const HamiltonianFn soft = [h = small_harmonic(wide, 0.0, 0.5)](double) { return h; };
    const auto b_const = extract_generator(soft, 0.7, 1e-4);
    const double e_const = relative_frobenius(b_const.matrix, soft(0.7).matrix);
    out.push_back(make_report("generator_time_independent", "evolution-generator", e_const, 1e-6 * scale,
                              "delta=1e-4 at t=0.7, n=32 omega=0.5"));

    const auto b_drive = extract_generator(driven, 1.0, 1e-4);
    const double e_drive = relative_frobenius(b_drive.matrix, driven(1.0).matrix);
    out.push_back(make_report("generator_driven", "evolution-generator", e_drive, 1e-4 * scale,
                              "H(t) = x^2/2 + 0.1 sin(t) x at t=1"));

    const double herm_defect = std::max(hermiticity_defect(b_const.matrix), hermiticity_defect(b_drive.matrix));
    out.push_back(make_report("generator_hermiticity", "evolution-generator", herm_defect, 1e-6 * scale));
    return out;
}

std::vector<CheckReport> integrator_checks(double scale)
{
    std::vector<CheckReport> out;

    // Spectrum surrogate.
    const auto rows = run_spectrum(harmonic_config(1, 1), 5);
    double spec = 0.0;
    for (const auto& r : rows) spec = std::max(spec, std::abs(r.energy - *r.analytic_energy));
    out.push_back(make_report("spectrum_harmonic", "spectrum", spec, 1e-6 * scale, "lowest 5 levels vs n + 1/2"));

    // Strang order: error ratio under dt halving against a dt/16 reference.
    {
        ScenarioConfig c = harmonic_config(1, 1);
        c.initial = {PacketAxis{0.5, 1.0, 0.5}};
        const auto s = build(c);
        const double t_end = 1.0;
        const double dt0 = 0.02;
        auto evolve = [&](double dt) {
            const auto steps = std::size_t(std::llround(t_end / dt));
            SplitStepper st(s.grid, s.potential.values, 1.0, 1.0, dt);
            CVector a(s.psi0.amps().begin(), s.psi0.amps().end());
            st.steps(a, steps);
            return a;
        };
        const auto ref = evolve(dt0 / 16.0);
        const double e1 = l2_distance(evolve(dt0), ref, s.grid.cell_volume());
        const double e2 = l2_distance(evolve(dt0 / 2.0), ref, s.grid.cell_volume());
        const double ratio = e1 / e2;
        out.push_back(make_report("split_step_order", "integrator", std::abs(ratio - 4.0), 0.5 * scale,
                                  "ratio=" + fmt(ratio) + " e(dt)=" + fmt(e1) + " e(dt/2)=" + fmt(e2)));
    }

    // Dense exact propagator vs split-step on a small grid.
    {
        ScenarioConfig c = harmonic_config(100, 100);
        c.grid = GridSpec{1, 64, {20.0, 20.0}, {-10.0, -10.0}};
        c.dt = 0.01;
        const auto s = build(c);
        const auto h = to_dense(hamiltonian(s.grid, s.potential.values));
        const auto u = dense_propagator(h, double(c.steps) * c.dt);
        const auto exact = apply(DenseOperator{u.matrix, s.grid}, s.psi0);
        SplitStepper st(s.grid, s.potential.values, 1.0, 1.0, c.dt);
        CVector a(s.psi0.amps().begin(), s.psi0.amps().end());
        st.steps(a, c.steps);
        const double d = l2_distance(a, exact.amps(), s.grid.cell_volume());
        out.push_back(make_report("dense_vs_split_step", "integrator", d, 10.0 * c.dt * c.dt * scale,
                                  "n=64 dt=0.01 T=1, tolerance 10 dt^2"));
    }

    // Superposition: evolving the normalised sum equals summing evolutions.
    {
        const auto c = harmonic_config(1000, 1000);
        const auto s = build(c);
        const auto psi1 = gaussian_packet(s.grid, -2.0, 1.0, 0.7);
        const auto psi2 = gaussian_packet(s.grid, 2.5, -0.5, 0.9);
        SplitStepper st(s.grid, s.potential.values, 1.0, 1.0, c.dt);
        CVector a1(psi1.amps().begin(), psi1.amps().end());
        CVector a2(psi2.amps().begin(), psi2.amps().end());
        CVector sum0(a1.size());
        for (std::size_t j = 0; j < sum0.size(); ++j) sum0[j] = a1[j] + a2[j];
        const auto mixed0 = psi1.with_amps(sum0).normalized();
        CVector mixed(mixed0.amps().begin(), mixed0.amps().end());
        st.steps(a1, c.steps);
        st.steps(a2, c.steps);
        st.steps(mixed, c.steps);
        CVector sum_t(a1.size());
        for (std::size_t j = 0; j < sum_t.size(); ++j) sum_t[j] = a1[j] + a2[j];
        const auto combined = psi1.with_amps(std::move(sum_t)).normalized();
        const double d = l2_distance(combined.amps(), mixed, s.grid.cell_volume());
        out.push_back(make_report("superposition", "P3-superposition", d, 1e-10 * scale,
                                  "two gaussians, 1000 steps in the harmonic well"));
    }
    return out;
}

std::vector<double> smooth_random_field(const Grid& grid, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> mode(0, 8);
    std::vector<double> out(grid.size(), 0.0);
    for (int term = 0; term < 4; ++term) {
        const double a = amp(rng);
        const double ph = phase(rng);
        const double k = 2.0 * std::numbers::pi * mode(rng) / grid.length(0);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += a * std::cos(k * grid.x_at(j, 0) + ph);
    }
    return out;
}

std::vector<CheckReport> field_checks(const VerifyConfig& cfg, double scale)
{
    std::vector<CheckReport> out;
    {
        const Grid grid = make_grid(1, 128, 2.0 * std::numbers::pi, 0.0);
        FieldConfiguration f{grid, {}, {}};
        for (int c = 0; c < 3; ++c) {
            f.e[c].assign(grid.size(), 0.0);
            f.h[c].assign(grid.size(), 0.0);
        }
        for (std::size_t j = 0; j < grid.size(); ++j) {
            f.e[1][j] = std::sin(grid.x_at(j, 0));
            f.h[2][j] = std::sin(grid.x_at(j, 0));
        }
        const auto w = field_energy(f);
        const double r = std::max(std::abs(w.real_space - 0.25), std::abs(w.k_space - 0.25));
        out.push_back(make_report("field_energy_analytic", "field-energy", r, 1e-10 * scale,
                                  "E_y = H_z = sin x on [0, 2 pi): W_real=" + fmt(w.real_space) + " W_k=" + fmt(w.k_space)));
    }
    {
        std::mt19937_64 rng(cfg.seed ^ 0x5eed0004ULL);
        std::uniform_real_distribution<double> len(1.0, 20.0);
        double worst_r = 0.0;
        for (std::size_t t = 0; t < cfg.field_trials; ++t) {
            const Grid grid = make_grid(1, 128, len(rng), 0.0);
            FieldConfiguration f{grid, {}, {}};
            for (int c = 0; c < 3; ++c) {
                f.e[c] = smooth_random_field(grid, rng);
                f.h[c] = smooth_random_field(grid, rng);
            }
            worst_r = std::max(worst_r, check_field_energy_parseval(f, 1.0).residual);
        }
        out.push_back(make_report("field_energy_parseval_random", "field-energy", worst_r, 1e-12 * scale,
                                  "trials=" + std::to_string(cfg.field_trials)));
    }
    return out;
}

} // namespace

std::vector<CheckReport> run_all(const VerifyConfig& cfg)
{
    validate(cfg);
    const double scale = cfg.tolerance_scale;
    using Group = std::function<std::vector<CheckReport>()>;
    const std::vector<std::pair<std::string, Group>> groups{
        {"dynamics", [&] { return dynamics_checks(scale); }},
        {"gauge_invariance", [&] { return std::vector<CheckReport>{gauge_check(scale)}; }},
        {"momentum", [&] { return momentum_checks(cfg, scale); }},
        {"commutators", [&] { return commutator_checks(cfg, scale); }},
        {"generators", [&] { return generator_checks(cfg, scale); }},
        {"integrator", [&] { return integrator_checks(scale); }},
        {"field_energy", [&] { return field_checks(cfg, scale); }},
    };

    std::vector<CheckReport> reports;
    for (const auto& [name, group] : groups) {
        try {
            auto r = group();
            reports.insert(reports.end(), r.begin(), r.end());
        } catch (const std::exception& e) {
            reports.push_back(make_report(name, "error", std::numeric_limits<double>::infinity(), 1.0,
                                          std::string("check raised: ") + e.what()));
        }
    }
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return reports;
}

} // namespace qpost
