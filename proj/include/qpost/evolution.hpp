#pragma once

#include "qpost/grid.hpp"
#include "qpost/operators.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace qpost {

/// Observables recorded along a trajectory. Vector quantities hold one entry
/// per axis; the second entry is zero on 1-D grids.
struct Record {
    double t = 0.0;
    double norm = 0.0;  // sum |psi|^2 dx^dim
    std::array<double, 2> x_mean{};
    std::array<double, 2> p_mean{};
    std::array<double, 2> f_mean{};
    double u_mean = 0.0;
    double energy = 0.0;
};

struct Trajectory {
    Grid grid;
    double hbar = 1.0;
    double mass = 1.0;
    double dt = 0.0;
    std::size_t record_every = 1;
    std::vector<double> times;
    std::vector<Wavefunction> states;  // empty unless requested
    std::vector<Record> records;

    double record_interval() const { return dt * double(record_every); }
};

/// Measures norm, <x>, <p>, <U>, <F> and <H> of a state. <p> and the kinetic
/// energy are evaluated as k-space sums with the Nyquist bin carrying no
/// momentum, matching momentum_op.
Record measure(const Wavefunction& psi, const Potential& potential, double t = 0.0);

/// One Strang step: half kick exp(-i U dt / 2 hbar), drift exp(-i T dt / hbar)
/// in k space, half kick. Stateless after construction; step() may be called
/// concurrently on distinct buffers.
class SplitStepper {
public:
    SplitStepper(const Grid& grid, std::span<const double> potential, double mass, double hbar, double dt);

    void step(std::span<cplx> amps) const;
    void steps(std::span<cplx> amps, std::size_t count) const;
    double dt() const { return dt_; }

private:
    Grid grid_;
    double dt_;
    CVector half_kick_;
    CVector drift_;  // includes the 1/N of the inverse DFT
};

struct SplitStepOptions {
    double dt = 1e-3;
    std::size_t steps = 1;
    std::size_t record_every = 1;
    bool keep_states = true;
};

/// Propagates psi0 under T + U. Records are taken every record_every steps,
/// starting with t = 0, so there are steps / record_every + 1 of them;
/// record_every must divide steps.
Trajectory split_step(const Wavefunction& psi0, const Potential& potential, const SplitStepOptions& options);

/// Dense propagator U(t1, t2) acting as psi(t2) = U psi(t1).
struct EvolutionOperator {
    Eigen::MatrixXcd matrix;
    double t1 = 0.0;
    double t2 = 0.0;
    Grid grid;
};

constexpr std::size_t kMaxPropagatorSize = 1024;

/// ||M^dagger M - I||_F
double unitarity_defect(const Eigen::MatrixXcd& m);

/// exp(-i H t / hbar) through the Hermitian eigendecomposition of H.
Eigen::MatrixXcd unitary_exponential(const Eigen::MatrixXcd& h, double t, double hbar = 1.0);

/// exp(A) for a normal matrix. Hermitian and anti-Hermitian inputs go through
/// the self-adjoint eigensolver; anything else through the general one.
Eigen::MatrixXcd normal_exponential(const Eigen::MatrixXcd& a);

EvolutionOperator dense_propagator(const DenseOperator& h, double delta_t, double hbar = 1.0);

using HamiltonianFn = std::function<DenseOperator(double)>;

/// Time-ordered product of midpoint slice propagators over [t1, t2]. Backward
/// intervals (t2 < t1) yield the exact inverse of the forward product.
EvolutionOperator evolution_operator(const HamiltonianFn& h_of_t, double t1, double t2, std::size_t n_slices,
                                     double hbar = 1.0);

/// i hbar [U(t, t + delta) - U(t, t - delta)] / (2 delta) U(t, t)^-1, with
/// single-slice propagators anchored at t.
DenseOperator extract_generator(const HamiltonianFn& h_of_t, double t, double delta = 1e-4, double hbar = 1.0);

struct EnergyLevel {
    double energy;
    Wavefunction state;
};

/// Lowest n_levels eigenpairs in ascending order. Eigenstates are normalised
/// under the dx measure with their largest component real and positive.
std::vector<EnergyLevel> spectrum(const DenseOperator& h, std::size_t n_levels, double hbar = 1.0, double mass = 1.0);

} // namespace qpost
