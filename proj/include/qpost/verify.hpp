#pragma once

#include "qpost/evolution.hpp"
#include "qpost/grid.hpp"
#include "qpost/operators.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qpost {

/// Outcome of one numerical check. passed holds exactly when the residual is
/// finite, the tolerance positive and residual <= tolerance.
struct CheckReport {
    std::string name;
    std::string tag;  // which postulate or derivation step the check exercises
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string details;
};

CheckReport make_report(std::string name, std::string tag, double residual, double tolerance, std::string details = {});

// ---------------------------------------------------------------------------
// Normalisation and momentum

/// max_t | ||psi(t)||^2 - 1 |
CheckReport check_normalization(const Trajectory& trajectory, double tolerance = 1e-10);
CheckReport check_normalization(const Wavefunction& psi, double tolerance = 1e-10);

/// sum_m hbar k_m |Phi_m|^2 dk over the momentum amplitudes, the Nyquist bin
/// (a standing wave) carrying zero momentum.
double kspace_momentum(const Wavefunction& psi, int axis = 0);

/// | k-space momentum - expectation(momentum_op, psi) |
CheckReport check_parseval_momentum(const Wavefunction& psi, double tolerance = 1e-10);

// ---------------------------------------------------------------------------
// Ehrenfest relations along a recorded trajectory

/// Per-record residuals |d<x>/dt - <p>/m| and |d<p>/dt - <F>|. Time
/// derivatives use the fourth-order centred stencil when five or more records
/// exist (the three-point one otherwise); records without a full stencil hold
/// no value.
struct EhrenfestResiduals {
    std::vector<std::optional<double>> velocity;
    std::vector<std::optional<double>> force;
};

EhrenfestResiduals ehrenfest_residuals(const Trajectory& trajectory, int axis = 0);
CheckReport check_ehrenfest_velocity(const Trajectory& trajectory, double tolerance = 1e-4, int axis = 0);
CheckReport check_ehrenfest_force(const Trajectory& trajectory, double tolerance = 1e-4, int axis = 0);

// ---------------------------------------------------------------------------
// Commutator system for the generator

struct CommutatorResiduals {
    double momentum_relation = 0.0;  // max ||(i/hbar)[H,P]psi + U' psi||
    double position_relation = 0.0;  // max ||(i/hbar)[H,X]psi - (P/m) psi||
};

/// State-wise residuals with dense H, X and P on a 1-D grid. constant_shift
/// replaces H by H + C I.
CommutatorResiduals commutator_system_residuals(const Grid& grid, const Potential& potential, double mass, double hbar,
                                                std::span<const Wavefunction> test_states, double constant_shift = 0.0);
CheckReport check_commutator_system(const Grid& grid, const Potential& potential, double mass, double hbar,
                                    std::span<const Wavefunction> test_states, double tolerance = 1e-6);

// ---------------------------------------------------------------------------
// Commutant of {X, P}

struct CommutantResult {
    std::size_t n = 0;
    std::size_t nullity = 0;
    double identity_alignment = 0.0;  // |<basis, I>| / (||basis|| ||I||), first null vector
    double rank_threshold = 0.0;
    double smallest_kept_singular_value = 0.0;
    double largest_null_singular_value = 0.0;
};

/// Null space of M -> ([M, X], [M, P]) over all n x n complex matrices, where
/// X is the diagonal position matrix and P the spectral momentum matrix on an
/// n-point periodic grid. With include_momentum false only [M, X] = 0 is
/// imposed.
CommutantResult commutant_analysis(std::size_t n, bool include_momentum = true);

/// residual = (nullity - 1) + (1 - identity alignment)
CheckReport check_commutant_uniqueness(std::size_t n, double tolerance = 1e-8);

// ---------------------------------------------------------------------------
// Unitary exponentials and anti-Hermitian generators

/// ||exp(A)^dagger exp(A) - I||_F
double exponential_unitarity_defect(const Eigen::MatrixXcd& a);

struct AntiHermitianResult {
    double exponential_defect = 0.0;  // direction (a), worst trial
    double generator_defect = 0.0;    // direction (b), worst trial
};

AntiHermitianResult antihermitian_exponential_residuals(std::size_t n, std::size_t n_random, std::uint64_t seed);
CheckReport check_antihermitian_exponential(std::size_t n, std::size_t n_random, std::uint64_t seed,
                                            double tolerance = 1e-10);

// ---------------------------------------------------------------------------
// Electromagnetic field energy in real and wavenumber space

struct FieldConfiguration {
    Grid grid;  // 1-D
    std::array<std::vector<double>, 3> e;
    std::array<std::vector<double>, 3> h;
};

struct FieldEnergy {
    double real_space = 0.0;  // (1/8 pi) sum_j (|E_j|^2 + |H_j|^2) dx
    double k_space = 0.0;     // (1/8 pi) sum_m (|E_m|^2 + |H_m|^2) dk
    std::vector<double> wavenumbers;
    std::vector<double> harmonic_energy;  // (|E(k)|^2 + |H(k)|^2) / 8 pi per bin
};

FieldEnergy field_energy(const FieldConfiguration& fields);
/// residual = |W_real - W_k| / max(W_real, tiny)
CheckReport check_field_energy_parseval(const FieldConfiguration& fields, double tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Whole suite

struct VerifyConfig {
    std::uint64_t seed = 20240601;
    double tolerance_scale = 1.0;
    std::size_t random_states = 100;
    std::size_t field_trials = 50;
    std::size_t antihermitian_trials = 100;
    std::size_t antihermitian_size = 16;
    std::vector<std::size_t> commutant_sizes{8, 16};
};

void validate(const VerifyConfig& config);

/// Runs every check with its default tolerance times tolerance_scale. A check
/// that throws becomes a failed report; reports come back sorted by name.
std::vector<CheckReport> run_all(const VerifyConfig& config);

} // namespace qpost
