#pragma once

#include "qpost/evolution.hpp"
#include "qpost/grid.hpp"
#include "qpost/operators.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qpost {

struct GridSpec {
    int dim = 1;
    std::size_t n = 256;
    std::array<double, 2> length{20.0, 20.0};
    std::array<double, 2> origin{-10.0, -10.0};
};

struct FreeSpec {};

/// U = m omega^2 |x|^2 / 2
struct HarmonicSpec {
    double omega = 1.0;
};

/// U = a * sum_axis x^4
struct QuarticSpec {
    double a = 0.25;
};

/// Wall of finite height across axis 0 with slits along axis 1, centred on
/// the packet's axis-1 position. Edges are tanh-smoothed over about two cells.
struct SlitWallSpec {
    double wall_position = -6.0;
    double detector_position = 6.0;
    int slit_count = 2;
    double slit_width = 1.5;
    double slit_separation = 4.0;
    double barrier_height = 2500.0;
    double barrier_thickness = 0.25;
};

using PotentialSpec = std::variant<FreeSpec, HarmonicSpec, QuarticSpec, SlitWallSpec>;

struct ScenarioConfig {
    std::string name = "harmonic";
    GridSpec grid;
    PotentialSpec potential = HarmonicSpec{};
    std::vector<PacketAxis> initial{PacketAxis{1.0, 0.0, 0.70710678118654757}};
    double dt = 1e-3;
    // For diffraction runs 0 means "stop once the transmitted packet has
    // crossed the detector".
    std::size_t steps = 1000;
    std::size_t record_every = 10;
    std::uint64_t seed = 0;
    double hbar = 1.0;
    double mass = 1.0;
};

/// Throws ErrorCode::Config with a message naming the offending key.
void validate(const ScenarioConfig& config);

struct BuiltScenario {
    Grid grid;
    Potential potential;
    Wavefunction psi0;
};

BuiltScenario build(const ScenarioConfig& config);

/// Sampled potential with analytic forces where a closed form exists.
Potential sample_potential(const Grid& grid, const ScenarioConfig& config);

Trajectory run(const ScenarioConfig& config, bool keep_states = false);

struct SpectrumRow {
    std::size_t level;
    double energy;
    std::optional<double> analytic_energy;
};

/// Closed-form level energies (harmonic potentials only).
std::optional<double> analytic_energy(const ScenarioConfig& config, std::size_t level);
std::vector<SpectrumRow> run_spectrum(const ScenarioConfig& config, std::size_t n_levels);

struct DiffractionResult {
    std::vector<double> positions;  // along axis 1 at the detector line
    std::vector<double> intensity;  // time-integrated |psi|^2
    std::vector<double> peaks;
    std::optional<double> measured_spacing;
    std::optional<double> predicted_spacing;  // lambda D / d
    std::optional<double> relative_error;
    double wavelength = 0.0;
    double screen_distance = 0.0;
    double t_stop = 0.0;
    std::size_t steps = 0;
    double final_norm = 0.0;
    double transmitted_fraction = 0.0;
    double axis_position = 0.0;
    std::vector<std::string> warnings;
};

DiffractionResult run_diffraction(const ScenarioConfig& config);

/// Local maxima of the 3-point moving average that reach at least
/// rel_threshold of its maximum, each refined to the vertex of the parabola
/// through its three neighbouring samples.
std::vector<double> find_peaks(std::span<const double> positions, std::span<const double> intensity,
                               double rel_threshold = 0.1);
/// Median distance between consecutive peaks; empty with fewer than two.
std::optional<double> median_spacing(std::span<const double> peaks);

/// max_j |I(y_j) - I(2 a - y_j)| / max I for the reflection about y = a.
double reflection_asymmetry(const DiffractionResult& result);

} // namespace qpost
