#include "qpost/evolution.hpp"

#include "qpost/error.hpp"

#include <cmath>
#include <sstream>

namespace qpost {

namespace {

constexpr double kHermitianTolerance = 1e-10;

void check_propagator_input(const DenseOperator& h, const char* what)
{
    require(h.matrix.rows() == h.matrix.cols() && std::size_t(h.matrix.rows()) == h.grid.size(),
            ErrorCode::InvalidArgument, std::string(what) + ": matrix size does not match its grid");
    if (std::size_t(h.matrix.rows()) > kMaxPropagatorSize) {
        std::ostringstream os;
        os << what << ": dense propagators are limited to " << kMaxPropagatorSize << " grid points";
        fail(ErrorCode::OutOfRange, os.str());
    }
    const double defect = hermiticity_defect(h.matrix);
    if (defect > kHermitianTolerance) {
        std::ostringstream os;
        os << what << ": Hamiltonian is not Hermitian (defect " << defect << ")";
        fail(ErrorCode::Numeric, os.str());
    }
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

} // namespace

Record measure(const Wavefunction& psi, const Potential& potential, double t)
{
    const Grid& grid = psi.grid();
    const auto a = psi.amps();
    require(potential.values.size() == a.size() && int(potential.force.size()) == grid.dim(),
            ErrorCode::InvalidArgument, "potential does not match the state grid");
    const double dv = grid.cell_volume();

    Record r;
    r.t = t;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double rho = std::norm(a[j]);
        r.norm += rho;
        r.u_mean += potential.values[j] * rho;
        for (int ax = 0; ax < grid.dim(); ++ax) {
            r.x_mean[ax] += grid.x_at(j, ax) * rho;
            r.f_mean[ax] += potential.force[ax][j] * rho;
        }
    }
    r.norm *= dv;
    r.u_mean *= dv;
    for (int ax = 0; ax < grid.dim(); ++ax) {
        r.x_mean[ax] *= dv;
        r.f_mean[ax] *= dv;
    }

    // sum_m g(k_m) |Phi_m|^2 dk^dim = dx^dim / N * sum_m g(k_m) |DFT(psi)_m|^2
    CVector spec(a.size());
    grid.dft_forward(a, spec);
    const double hbar = psi.hbar();
    double kinetic = 0.0;
    for (std::size_t m = 0; m < spec.size(); ++m) {
        const double w = std::norm(spec[m]);
        double k2 = 0.0;
        for (int ax = 0; ax < grid.dim(); ++ax) {
            const double k = grid.k_at(m, ax);
            k2 += k * k;
            if (!grid.is_nyquist(m, ax)) r.p_mean[ax] += hbar * k * w;
        }
        kinetic += hbar * hbar * k2 / (2.0 * psi.mass()) * w;
    }
    const double scale = dv / double(spec.size());
    for (int ax = 0; ax < grid.dim(); ++ax) r.p_mean[ax] *= scale;
    r.energy = kinetic * scale + r.u_mean;
    return r;
}

SplitStepper::SplitStepper(const Grid& grid, std::span<const double> potential, double mass, double hbar, double dt)
    : grid_(grid), dt_(dt)
{
    require(dt > 0.0 && std::isfinite(dt), ErrorCode::InvalidArgument, "time step dt must be positive");
    require(mass > 0.0 && hbar > 0.0, ErrorCode::InvalidArgument, "mass and hbar must be positive");
    require(potential.size() == grid.size(), ErrorCode::InvalidArgument, "potential does not match the grid");
    half_kick_.resize(grid.size());
    for (std::size_t j = 0; j < potential.size(); ++j) half_kick_[j] = std::polar(1.0, -potential[j] * dt / (2.0 * hbar));
    drift_.resize(grid.size());
    const double inv_n = 1.0 / double(grid.size());
    for (std::size_t m = 0; m < drift_.size(); ++m) {
        double k2 = 0.0;
        for (int ax = 0; ax < grid.dim(); ++ax) k2 += grid.k_at(m, ax) * grid.k_at(m, ax);
        drift_[m] = std::polar(inv_n, -hbar * k2 * dt / (2.0 * mass));
    }
}

void SplitStepper::step(std::span<cplx> amps) const
{
    const std::size_t n = amps.size();
    for (std::size_t j = 0; j < n; ++j) amps[j] *= half_kick_[j];
    grid_.dft_forward_inplace(amps);
    for (std::size_t m = 0; m < n; ++m) amps[m] *= drift_[m];
    grid_.dft_backward_inplace(amps);
    for (std::size_t j = 0; j < n; ++j) amps[j] *= half_kick_[j];
}

void SplitStepper::steps(std::span<cplx> amps, std::size_t count) const
{
    for (std::size_t i = 0; i < count; ++i) step(amps);
}

Trajectory split_step(const Wavefunction& psi0, const Potential& potential, const SplitStepOptions& options)
{
    require(options.steps >= 1, ErrorCode::InvalidArgument, "steps must be at least 1");
    require(options.record_every >= 1, ErrorCode::InvalidArgument, "record_every must be at least 1");
    if (options.steps % options.record_every != 0) {
        std::ostringstream os;
        os << "record_every (" << options.record_every << ") must divide steps (" << options.steps << ")";
        fail(ErrorCode::InvalidArgument, os.str());
    }
    const Grid& grid = psi0.grid();
    SplitStepper stepper(grid, potential.values, psi0.mass(), psi0.hbar(), options.dt);

    Trajectory traj{grid, psi0.hbar(), psi0.mass(), options.dt, options.record_every, {}, {}, {}};
    const std::size_t n_records = options.steps / options.record_every + 1;
    traj.times.reserve(n_records);
    traj.records.reserve(n_records);

    CVector amps(psi0.amps().begin(), psi0.amps().end());
    auto record = [&](std::size_t step) {
        const double t = double(step) * options.dt;
        Wavefunction psi = psi0.with_amps(amps);
        traj.times.push_back(t);
        traj.records.push_back(measure(psi, potential, t));
        if (options.keep_states) traj.states.push_back(std::move(psi));
    };

    record(0);
    for (std::size_t s = 0; s < options.steps; s += options.record_every) {
        stepper.steps(amps, options.record_every);
        record(s + options.record_every);
    }
    return traj;
}

double unitarity_defect(const Eigen::MatrixXcd& m)
{
    return (m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).norm();
}

Eigen::MatrixXcd unitary_exponential(const Eigen::MatrixXcd& h, double t, double hbar)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h));
    require(es.info() == Eigen::Success, ErrorCode::Numeric, "Hermitian eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    Eigen::VectorXcd phase(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) phase(i) = std::polar(1.0, -ev(i) * t / hbar);
    const Eigen::MatrixXcd& v = es.eigenvectors();
    return v * phase.asDiagonal() * v.adjoint();
}

Eigen::MatrixXcd normal_exponential(const Eigen::MatrixXcd& a)
{
    require(a.rows() == a.cols(), ErrorCode::InvalidArgument, "exponential of a non-square matrix");
    const double total = a.norm();
    if (total == 0.0) return Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXcd herm = 0.5 * (a + a.adjoint());
    const Eigen::MatrixXcd anti = 0.5 * (a - a.adjoint());
    const double tiny = 1e-14 * total;
    if (anti.norm() <= tiny) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        require(es.info() == Eigen::Success, ErrorCode::Numeric, "Hermitian eigendecomposition failed");
        const Eigen::VectorXcd e = es.eigenvalues().array().exp().cast<cplx>();
        return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
    }
    if (herm.norm() <= tiny) {
        // A = iG with G Hermitian, so exp(A) = V exp(i lambda) V^dagger.
        const Eigen::MatrixXcd g = cplx(0.0, -1.0) * anti;
        return unitary_exponential(g, -1.0);
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a);
    require(es.info() == Eigen::Success, ErrorCode::Numeric, "eigendecomposition failed");
    const Eigen::VectorXcd e = es.eigenvalues().array().exp();
    const Eigen::MatrixXcd& v = es.eigenvectors();
    return v * e.asDiagonal() * v.inverse();
}

EvolutionOperator dense_propagator(const DenseOperator& h, double delta_t, double hbar)
{
    check_propagator_input(h, "dense_propagator");
    require(hbar > 0.0, ErrorCode::InvalidArgument, "hbar must be positive");
    require(std::isfinite(delta_t), ErrorCode::InvalidArgument, "delta_t must be finite");
    if (delta_t == 0.0) return EvolutionOperator{Eigen::MatrixXcd::Identity(h.matrix.rows(), h.matrix.cols()), 0.0, 0.0, h.grid};
    EvolutionOperator u{unitary_exponential(h.matrix, delta_t, hbar), 0.0, delta_t, h.grid};
    const double defect = unitarity_defect(u.matrix);
    if (defect > 1e-9) {
        std::ostringstream os;
        os << "dense_propagator: result not unitary (defect " << defect << ")";
        fail(ErrorCode::Numeric, os.str());
    }
    return u;
}

EvolutionOperator evolution_operator(const HamiltonianFn& h_of_t, double t1, double t2, std::size_t n_slices,
                                     double hbar)
{
    require(bool(h_of_t), ErrorCode::InvalidArgument, "evolution_operator needs a Hamiltonian");
    require(n_slices >= 1, ErrorCode::InvalidArgument, "n_slices must be at least 1");
    require(std::isfinite(t1) && std::isfinite(t2), ErrorCode::InvalidArgument, "times must be finite");
    require(hbar > 0.0, ErrorCode::InvalidArgument, "hbar must be positive");

    const DenseOperator first = h_of_t(t1 + 0.5 * (t2 - t1) / double(n_slices));
    check_propagator_input(first, "evolution_operator");
    const auto dim = first.matrix.rows();
    EvolutionOperator u{Eigen::MatrixXcd::Identity(dim, dim), t1, t2, first.grid};
    if (t1 == t2) return u;

    const double h = (t2 - t1) / double(n_slices);
    for (std::size_t i = 0; i < n_slices; ++i) {
        const DenseOperator hm = i == 0 ? first : h_of_t(t1 + (double(i) + 0.5) * h);
        if (i != 0) check_propagator_input(hm, "evolution_operator");
        require(hm.matrix.rows() == dim, ErrorCode::InvalidArgument, "Hamiltonian dimension changed over time");
        u.matrix = unitary_exponential(hm.matrix, h, hbar) * u.matrix;
    }
    return u;
}

DenseOperator extract_generator(const HamiltonianFn& h_of_t, double t, double delta, double hbar)
{
    require(delta > 0.0 && std::isfinite(delta), ErrorCode::InvalidArgument, "delta must be positive");
    const EvolutionOperator forward = evolution_operator(h_of_t, t, t + delta, 1, hbar);
    const EvolutionOperator backward = evolution_operator(h_of_t, t, t - delta, 1, hbar);
    const EvolutionOperator anchor = evolution_operator(h_of_t, t, t, 1, hbar);
    for (const auto* u : {&forward, &backward, &anchor}) {
        const double defect = unitarity_defect(u->matrix);
        if (defect > 1e-9) {
            std::ostringstream os;
            os << "extract_generator: evolution operator not unitary (defect " << defect << ")";
            fail(ErrorCode::Numeric, os.str());
        }
    }
    // U^-1 = U^dagger for a unitary U.
    const Eigen::MatrixXcd derivative = (forward.matrix - backward.matrix) / (2.0 * delta);
    return DenseOperator{cplx(0.0, hbar) * derivative * anchor.matrix.adjoint(), forward.grid};
}

std::vector<EnergyLevel> spectrum(const DenseOperator& h, std::size_t n_levels, double hbar, double mass)
{
    require(h.matrix.rows() == h.matrix.cols() && std::size_t(h.matrix.rows()) == h.grid.size(),
            ErrorCode::InvalidArgument, "spectrum: matrix size does not match its grid");
    if (n_levels == 0 || n_levels > std::size_t(h.matrix.rows())) {
        std::ostringstream os;
        os << "spectrum: requested " << n_levels << " levels from a " << h.matrix.rows() << "-dimensional operator";
        fail(ErrorCode::OutOfRange, os.str());
    }
    const double defect = hermiticity_defect(h.matrix);
    if (defect > kHermitianTolerance) {
        std::ostringstream os;
        os << "spectrum: operator is not Hermitian (defect " << defect << ")";
        fail(ErrorCode::Numeric, os.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(h.matrix));
    require(es.info() == Eigen::Success, ErrorCode::Numeric, "Hermitian eigendecomposition failed");

    const double inv_sqrt_dv = 1.0 / std::sqrt(h.grid.cell_volume());
    std::vector<EnergyLevel> levels;
    levels.reserve(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
        Eigen::VectorXcd v = es.eigenvectors().col(Eigen::Index(l));
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        const cplx phase = std::conj(v(imax)) / std::abs(v(imax));
        CVector amps(std::size_t(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) amps[std::size_t(i)] = v(i) * phase * inv_sqrt_dv;
        levels.push_back(EnergyLevel{es.eigenvalues()(Eigen::Index(l)), Wavefunction(h.grid, std::move(amps), hbar, mass)});
    }
    return levels;
}

} // namespace qpost
