#include "qpost/scenarios.hpp"

#include "qpost/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qpost {

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& msg)
{
    fail(ErrorCode::Config, key + ": " + msg);
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

double smooth_step(double u, double width) { return 0.5 * (1.0 + std::tanh(u / width)); }

double wall_profile(const SlitWallSpec& s, double x, double width)
{
    const double half = 0.5 * s.barrier_thickness;
    return smooth_step(x - (s.wall_position - half), width) * smooth_step((s.wall_position + half) - x, width);
}

std::vector<double> slit_centres(const SlitWallSpec& s, double axis)
{
    if (s.slit_count == 1) return {axis};
    return {axis - 0.5 * s.slit_separation, axis + 0.5 * s.slit_separation};
}

double aperture(const SlitWallSpec& s, double y, double axis, double width)
{
    double open = 0.0;
    for (double c : slit_centres(s, axis)) {
        const double half = 0.5 * s.slit_width;
        open += smooth_step(y - (c - half), width) * smooth_step((c + half) - y, width);
    }
    return std::min(open, 1.0);
}

} // namespace

void validate(const ScenarioConfig& c)
{
    const auto& g = c.grid;
    if (g.dim != 1 && g.dim != 2) config_error("grid.dim", "must be 1 or 2");
    if (g.n < 8 || (g.n & (g.n - 1)) != 0) config_error("grid.n", "must be a power of two >= 8");
    if (g.dim == 2 && g.n > 4096) config_error("grid.n", "must not exceed 4096 on 2-D grids");
    for (int a = 0; a < g.dim; ++a) {
        if (!positive(g.length[a])) config_error("grid.length", "must be positive");
        if (!std::isfinite(g.origin[a])) config_error("grid.origin", "must be finite");
    }

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, HarmonicSpec>) {
                if (!positive(p.omega)) config_error("potential.omega", "must be positive");
            } else if constexpr (std::is_same_v<T, QuarticSpec>) {
                if (!positive(p.a)) config_error("potential.a", "must be positive");
            } else if constexpr (std::is_same_v<T, SlitWallSpec>) {
                if (g.dim != 2) config_error("potential.type", "slit_wall requires grid.dim = 2");
                if (p.slit_count != 1 && p.slit_count != 2) config_error("potential.slit_count", "must be 1 or 2");
                if (!positive(p.slit_width)) config_error("potential.slit_width", "must be positive");
                if (p.slit_count == 2 && !(p.slit_separation > p.slit_width))
                    config_error("potential.slit_separation", "must exceed slit_width");
                if (!std::isfinite(p.barrier_height) || p.barrier_height < 0.0)
                    config_error("potential.barrier_height", "must be >= 0");
                if (!positive(p.barrier_thickness)) config_error("potential.barrier_thickness", "must be positive");
                const double lo = g.origin[0];
                const double hi = g.origin[0] + g.length[0];
                if (!(p.wall_position > lo && p.wall_position < hi))
                    config_error("potential.wall_position", "must lie inside the grid");
                if (!(p.detector_position > p.wall_position && p.detector_position < hi))
                    config_error("potential.detector_position", "must lie between the wall and the grid edge");
            }
        },
        c.potential);

    if (int(c.initial.size()) != g.dim) config_error("initial", "needs one entry per grid axis");
    for (const auto& ax : c.initial) {
        if (!positive(ax.sigma)) config_error("initial.sigma", "must be positive");
        if (!std::isfinite(ax.x0)) config_error("initial.x0", "must be finite");
        if (!std::isfinite(ax.p0)) config_error("initial.p0", "must be finite");
    }
    if (!positive(c.dt)) config_error("dt", "must be positive");
    if (!positive(c.hbar)) config_error("hbar", "must be positive");
    if (!positive(c.mass)) config_error("mass", "must be positive");
    if (c.record_every < 1) config_error("record_every", "must be at least 1");
    const bool diffraction = std::holds_alternative<SlitWallSpec>(c.potential);
    if (!diffraction) {
        if (c.steps < 1) config_error("steps", "must be at least 1");
        if (c.steps % c.record_every != 0) config_error("record_every", "must divide steps");
    }
}

Potential sample_potential(const Grid& grid, const ScenarioConfig& c)
{
    const std::size_t size = grid.size();
    std::vector<double> u(size, 0.0);
    std::vector<std::vector<double>> force(std::size_t(grid.dim()), std::vector<double>(size, 0.0));

    return std::visit(
        [&](const auto& p) -> Potential {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FreeSpec>) {
                return make_potential(grid, std::move(u), std::move(force));
            } else if constexpr (std::is_same_v<T, HarmonicSpec>) {
                const double k = c.mass * p.omega * p.omega;
                for (std::size_t f = 0; f < size; ++f) {
                    for (int a = 0; a < grid.dim(); ++a) {
                        const double x = grid.x_at(f, a);
                        u[f] += 0.5 * k * x * x;
                        force[a][f] = -k * x;
                    }
                }
                return make_potential(grid, std::move(u), std::move(force));
            } else if constexpr (std::is_same_v<T, QuarticSpec>) {
                for (std::size_t f = 0; f < size; ++f) {
                    for (int a = 0; a < grid.dim(); ++a) {
                        const double x = grid.x_at(f, a);
                        u[f] += p.a * x * x * x * x;
                        force[a][f] = -4.0 * p.a * x * x * x;
                    }
                }
                return make_potential(grid, std::move(u), std::move(force));
            } else {
                const double width = std::max(grid.dx(0), grid.dx(1));
                const double axis = c.initial.size() > 1 ? c.initial[1].x0 : 0.0;
                for (std::size_t f = 0; f < size; ++f) {
                    const double x = grid.x_at(f, 0);
                    const double y = grid.x_at(f, 1);
                    u[f] = p.barrier_height * wall_profile(p, x, width) * (1.0 - aperture(p, y, axis, width));
                }
                return make_potential(grid, std::move(u));
            }
        },
        c.potential);
}

BuiltScenario build(const ScenarioConfig& c)
{
    validate(c);
    Grid grid = make_grid(c.grid.dim, c.grid.n, c.grid.length, c.grid.origin);
    Potential pot = sample_potential(grid, c);
    Wavefunction psi0 = gaussian_packet(grid, c.initial, c.hbar, c.mass);
    return BuiltScenario{std::move(grid), std::move(pot), std::move(psi0)};
}

Trajectory run(const ScenarioConfig& c, bool keep_states)
{
    require(!std::holds_alternative<SlitWallSpec>(c.potential), ErrorCode::Config,
            "potential.type: slit_wall scenarios run through the diffraction command");
    const auto s = build(c);
    return split_step(s.psi0, s.potential, SplitStepOptions{c.dt, c.steps, c.record_every, keep_states});
}

std::optional<double> analytic_energy(const ScenarioConfig& c, std::size_t level)
{
    const auto* h = std::get_if<HarmonicSpec>(&c.potential);
    if (!h) return std::nullopt;
    const double quantum = c.hbar * h->omega;
    if (c.grid.dim == 1) return quantum * (double(level) + 0.5);
    // 2-D levels (nx + ny + 1) hbar omega with degeneracy N + 1 for N = nx + ny.
    std::size_t seen = 0;
    for (std::size_t shell = 0;; ++shell) {
        seen += shell + 1;
        if (level < seen) return quantum * (double(shell) + 1.0);
    }
}

std::vector<SpectrumRow> run_spectrum(const ScenarioConfig& c, std::size_t n_levels)
{
    const auto s = build(c);
    if (s.grid.size() > kMaxDenseSize) {
        std::ostringstream os;
        os << "grid.n: spectrum needs at most " << kMaxDenseSize << " grid points, grid has " << s.grid.size();
        fail(ErrorCode::OutOfRange, os.str());
    }
    const DenseOperator h = to_dense(hamiltonian(s.grid, s.potential.values, c.mass, c.hbar));
    const auto levels = spectrum(h, n_levels, c.hbar, c.mass);
    std::vector<SpectrumRow> rows;
    rows.reserve(levels.size());
    for (std::size_t l = 0; l < levels.size(); ++l) rows.push_back({l, levels[l].energy, analytic_energy(c, l)});
    return rows;
}

std::vector<double> find_peaks(std::span<const double> positions, std::span<const double> intensity,
                               double rel_threshold)
{
    const std::size_t n = intensity.size();
    std::vector<double> smooth(n);
    for (std::size_t j = 0; j < n; ++j)
        smooth[j] = (intensity[(j + n - 1) % n] + intensity[j] + intensity[(j + 1) % n]) / 3.0;
    const double top = n ? *std::max_element(smooth.begin(), smooth.end()) : 0.0;
    std::vector<double> peaks;
    if (top <= 0.0) return peaks;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        if (!(smooth[j] > smooth[j - 1] && smooth[j] >= smooth[j + 1] && smooth[j] >= rel_threshold * top)) continue;
        // Vertex of the parabola through the three samples, so peak positions
        // are not quantised to the grid.
        const double curvature = smooth[j - 1] - 2.0 * smooth[j] + smooth[j + 1];
        const double shift = curvature < 0.0 ? 0.5 * (smooth[j - 1] - smooth[j + 1]) / curvature : 0.0;
        peaks.push_back(positions[j] + shift * (positions[j + 1] - positions[j]));
    }
    return peaks;
}

std::optional<double> median_spacing(std::span<const double> peaks)
{
    if (peaks.size() < 2) return std::nullopt;
    std::vector<double> gaps;
    for (std::size_t i = 1; i < peaks.size(); ++i) gaps.push_back(peaks[i] - peaks[i - 1]);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t m = gaps.size() / 2;
    return gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
}

double reflection_asymmetry(const DiffractionResult& r)
{
    const std::size_t n = r.intensity.size();
    if (n < 2) return 0.0;
    const double dy = r.positions[1] - r.positions[0];
    const double origin = r.positions[0];
    const double top = *std::max_element(r.intensity.begin(), r.intensity.end());
    if (top <= 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double mirrored = 2.0 * r.axis_position - r.positions[j];
        const long idx = std::lround((mirrored - origin) / dy);
        const std::size_t jm = std::size_t(((idx % long(n)) + long(n)) % long(n));
        worst = std::max(worst, std::abs(r.intensity[j] - r.intensity[jm]));
    }
    return worst / top;
}

DiffractionResult run_diffraction(const ScenarioConfig& c)
{
    const auto* wall = std::get_if<SlitWallSpec>(&c.potential);
    require(wall != nullptr, ErrorCode::Config, "potential.type: diffraction needs a slit_wall potential");
    validate(c);
    require(c.initial[0].p0 > 0.0, ErrorCode::Config, "initial.p0: packet must move towards the wall (+x)");
    require(c.initial[0].x0 < wall->wall_position, ErrorCode::Config, "initial.x0: packet must start before the wall");

    const auto s = build(c);
    const Grid& grid = s.grid;
    const std::size_t n = grid.n();

    DiffractionResult r;
    r.axis_position = c.initial[1].x0;
    const double p0 = c.initial[0].p0;
    const double speed = p0 / c.mass;
    r.wavelength = 2.0 * std::numbers::pi * c.hbar / p0;
    r.screen_distance = wall->detector_position - wall->wall_position;

    // Stop once the packet tail has crossed the detector, but before the
    // reflected front has wrapped around the periodic box to reach it.
    const double sigma_x = c.initial[0].sigma;
    const double tail = c.initial[0].x0 - 4.0 * sigma_x;
    const double front = c.initial[0].x0 + 4.0 * sigma_x;
    const double oblique = std::hypot(r.screen_distance, 0.5 * r.screen_distance);
    const double t_tail = ((wall->wall_position - tail) + oblique) / speed;
    // The reflected wave turns at the front face of the wall.
    const double t_reflect =
        ((wall->wall_position - front) + (grid.length(0) - r.screen_distance) - wall->barrier_thickness) / speed;
    double t_stop = 0.0;
    if (c.steps > 0) {
        t_stop = double(c.steps) * c.dt;
    } else if (t_reflect > t_tail) {
        t_stop = t_tail + 0.5 * (t_reflect - t_tail);
    } else {
        t_stop = t_reflect;
        r.warnings.push_back("reflected wave reaches the detector before the transmitted packet has passed; "
                             "enlarge grid.length or move the detector closer to the wall");
    }
    r.steps = c.steps > 0 ? c.steps : std::size_t(std::ceil(t_stop / c.dt));
    r.t_stop = double(r.steps) * c.dt;

    if (wall->barrier_height == 0.0) r.warnings.push_back("barrier_height is 0: no wall, interference analysis skipped");

    const auto xs = grid.coords(0);
    const std::size_t column =
        std::size_t(std::min_element(xs.begin(), xs.end(),
                                     [&](double a, double b) {
                                         return std::abs(a - wall->detector_position) <
                                                std::abs(b - wall->detector_position);
                                     }) -
                    xs.begin());

    SplitStepper stepper(grid, s.potential.values, c.mass, c.hbar, c.dt);
    CVector amps(s.psi0.amps().begin(), s.psi0.amps().end());
    r.intensity.assign(n, 0.0);
    for (std::size_t step = 0; step < r.steps; ++step) {
        stepper.step(amps);
        for (std::size_t j = 0; j < n; ++j) r.intensity[j] += std::norm(amps[column * n + j]) * c.dt;
    }
    const auto ys = grid.coords(1);
    r.positions.assign(ys.begin(), ys.end());
    r.final_norm = s.psi0.with_amps(std::move(amps)).norm_squared();

    // Time-integrated density times speed approximates the fluence through
    // the detector line.
    double fluence = 0.0;
    for (double v : r.intensity) fluence += v;
    r.transmitted_fraction = fluence * grid.dx(1) * speed;
    // Unresolved wall edges scatter roughly 1e-4 of the packet to high k, so
    // anything below 1e-3 is indistinguishable from an opaque wall.
    if (r.transmitted_fraction < 1e-3) {
        std::ostringstream os;
        os << "no transmitted amplitude reached the detector (fraction " << r.transmitted_fraction
           << "); barrier too high or too thick";
        fail(ErrorCode::NoTransmission, os.str());
    }

    r.peaks = find_peaks(r.positions, r.intensity);
    if (wall->slit_count == 2 && wall->barrier_height > 0.0) {
        r.predicted_spacing = r.wavelength * r.screen_distance / wall->slit_separation;
        r.measured_spacing = median_spacing(r.peaks);
        if (r.measured_spacing) {
            r.relative_error = std::abs(*r.measured_spacing - *r.predicted_spacing) / *r.predicted_spacing;
        } else {
            r.warnings.push_back("fewer than two intensity peaks: fringe spacing unavailable");
        }
    }
    return r;
}

} // namespace qpost
