#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ybspin/spectra.hpp"
#include "ybspin/spin_system.hpp"

namespace ybspin {

/// Time series of a decay measurement. Times strictly increasing, at least
/// five points; per-point noise sigmas optional (uniform weights otherwise).
struct DecayTrace {
    std::vector<double> times_s;
    std::vector<double> values;
    std::vector<double> sigma;

    void validate() const;
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;
    double initial_residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> flags;
    std::string message;

    double param(const std::string& name) const;
    double uncertainty(const std::string& name) const;
    bool has_flag(const std::string& flag) const;
};

// ---------------------------------------------------------------------------
// Damped least squares engine
// ---------------------------------------------------------------------------

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LmOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-10; // relative to max(1, cost)
    double step_tol = 1e-14;
    double fd_step_rel = 1e-6;
    double fd_step_min = 1e-8;
    Eigen::VectorXd lower; // empty = unbounded
    Eigen::VectorXd upper;
};

struct LmOutcome {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    double residual_norm = 0.0;
    double initial_residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
    std::vector<int> at_bound;
    std::vector<int> unidentifiable;
};

/// Central-difference Jacobian, the derivative path used by the optimizer.
Eigen::MatrixXd fd_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                            double step_rel = 1e-6, double step_min = 1e-8);

/// Levenberg-Marquardt with multiplicative damping, optional box projection,
/// and covariance from the pseudo-inverse of J^T J at the optimum.
LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0,
                              const LmOptions& options = {});

// ---------------------------------------------------------------------------
// Decay and line fits
// ---------------------------------------------------------------------------

/// y = amplitude * exp(-t/tau) + offset. Params: amplitude, tau_s, offset.
FitResult fit_exponential(const DecayTrace& trace);

enum class EchoMode { field, intensity };

/// Stretched-exponential echo decay E0 exp(-(2 t12 / Tm)^x) with Tm > 0 and
/// x in [0.5, 4]; intensity mode fits the squared model to photodetector
/// power data. Params: e0, tm_s, x. fix_x pins the stretch exponent.
FitResult fit_mims(const DecayTrace& trace, EchoMode mode = EchoMode::field,
                   std::optional<double> fix_x = std::nullopt);

/// Effective homogeneous linewidth 1/(pi Tm) in Hz.
double effective_linewidth(double tm_s);

/// y = height * (fwhm/2)^2 / ((x - center)^2 + (fwhm/2)^2) + offset.
/// Params: center, fwhm, height, offset.
FitResult fit_lorentzian(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Spin-Hamiltonian fit
// ---------------------------------------------------------------------------

/// One measured optical-hyperfine line position. ground_index/excited_index
/// of 0 mean unassigned; assignment then happens against the initial-guess
/// catalog.
struct PeakObservation {
    FieldVector field;
    Polarization pol = Polarization::pi;
    double freq_ghz = 0.0;
    double uncertainty_ghz = 1e-3;
    std::string label;
    int ground_index = 0;
    int excited_index = 0;

    void validate() const;
};

struct Assignment {
    std::vector<int> line_for_obs; // index into catalog, -1 when unmatched
    std::vector<int> unmatched;
    std::vector<int> ambiguous;
};

/// Greedy nearest-frequency matching of observations to predicted lines,
/// gated at gate_sigmas times each observation's uncertainty. Deterministic
/// and stable under observation reordering; unmatched observations are
/// listed, never dropped silently.
Assignment line_assignment(std::span<const PeakObservation> observations,
                           std::span<const TransitionLine> predicted, double gate_sigmas = 3.0);

struct SpinHamFitOptions {
    LmOptions lm;
    double assignment_gate_sigmas = 3.0;
};

/// Fit the excited-manifold tensors (A_par, A_perp, g_par, g_perp) and the
/// optical offset to measured line positions, with the ground manifold fixed.
/// Params: a_par_ghz, a_perp_ghz, g_par, g_perp, offset_ghz.
FitResult fit_spin_hamiltonian(std::span<const PeakObservation> observations,
                               const ManifoldParams& ground, const ManifoldParams& excited_guess,
                               const PhysicalConstants& consts,
                               std::span<const TransitionMoment> moments,
                               NuclearZeeman mode = NuclearZeeman::folded,
                               const SpinHamFitOptions& options = {});

} // namespace ybspin
