#include "ybspin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ybspin {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const LmOptions& opt) {
    if (opt.lower.size() == x.size()) x = x.cwiseMax(opt.lower);
    if (opt.upper.size() == x.size()) x = x.cwiseMin(opt.upper);
    return x;
}

std::vector<double> weights_for(const DecayTrace& trace) {
    if (!trace.sigma.empty()) {
        std::vector<double> w(trace.sigma.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / trace.sigma[i];
        return w;
    }
    return std::vector<double>(trace.values.size(), 1.0);
}

FitResult pack_result(const LmOutcome& out, std::vector<std::string> names) {
    FitResult r;
    r.names = std::move(names);
    r.values = out.params;
    r.covariance = out.covariance;
    r.residual_norm = out.residual_norm;
    r.initial_residual_norm = out.initial_residual_norm;
    r.iterations = out.iterations;
    r.converged = out.converged;
    r.message = out.message;
    return r;
}

/// Rewrite a result whose internal parameter k was ln(value) into the value
/// itself, delta-method on the covariance.
void delogify(FitResult& r, int k) {
    const double value = std::exp(r.values(k));
    r.values(k) = value;
    if (r.covariance.size() > 0) {
        r.covariance.row(k) *= value;
        r.covariance.col(k) *= value;
    }
}

double interpolate_crossing(const std::vector<double>& t, const std::vector<double>& y,
                            double target) {
    for (std::size_t i = 1; i < y.size(); ++i) {
        if ((y[i - 1] - target) * (y[i] - target) <= 0.0 && y[i] != y[i - 1]) {
            const double frac = (target - y[i - 1]) / (y[i] - y[i - 1]);
            return t[i - 1] + frac * (t[i] - t[i - 1]);
        }
    }
    return -1.0;
}

} // namespace

void DecayTrace::validate() const {
    if (times_s.size() != values.size() || times_s.size() < 5) {
        throw std::invalid_argument("DecayTrace: need at least 5 points with matching times/values");
    }
    for (std::size_t i = 1; i < times_s.size(); ++i) {
        if (!(times_s[i] > times_s[i - 1])) {
            throw std::invalid_argument("DecayTrace: times must be strictly increasing");
        }
    }
    if (!sigma.empty()) {
        if (sigma.size() != values.size()) {
            throw std::invalid_argument("DecayTrace: sigma length mismatch");
        }
        for (double s : sigma) {
            if (!(s > 0.0)) throw std::invalid_argument("DecayTrace: sigmas must be positive");
        }
    }
}

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values(static_cast<Eigen::Index>(i));
    }
    throw std::invalid_argument("FitResult: no parameter named '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            const auto k = static_cast<Eigen::Index>(i);
            return covariance.size() > 0 ? std::sqrt(std::max(0.0, covariance(k, k))) : 0.0;
        }
    }
    throw std::invalid_argument("FitResult: no parameter named '" + name + "'");
}

bool FitResult::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

Eigen::MatrixXd fd_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, double step_rel,
                            double step_min) {
    const Eigen::VectorXd r0 = fn(x);
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = std::max(step_rel * std::abs(x(j)), step_min);
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        jac.col(j) = (fn(xp) - fn(xm)) / (2.0 * h);
    }
    return jac;
}

LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0, const LmOptions& opt) {
    LmOutcome out;
    Eigen::VectorXd x = clamp_to_box(std::move(x0), opt);
    Eigen::VectorXd r = fn(x);
    double cost = 0.5 * r.squaredNorm();
    out.initial_residual_norm = std::sqrt(2.0 * cost);

    const Eigen::Index n = x.size();
    const Eigen::Index m = r.size();
    double lambda = 1e-3;
    bool converged = false;
    std::string message;
    int iter = 0;

    Eigen::MatrixXd jac;
    for (; iter < opt.max_iterations; ++iter) {
        jac = fd_jacobian(fn, x, opt.fd_step_rel, opt.fd_step_min);
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= opt.gradient_tol * std::max(1.0, cost)) {
            converged = true;
            message = "gradient below tolerance";
            break;
        }

        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);
        bool accepted = false;
        Eigen::VectorXd step;
        for (int inner = 0; inner < 60; ++inner) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            step = a.ldlt().solve(-grad);
            const Eigen::VectorXd x_new = clamp_to_box(x + step, opt);
            const Eigen::VectorXd r_new = fn(x_new);
            const double cost_new = 0.5 * r_new.squaredNorm();
            if (cost_new < cost) {
                step = x_new - x;
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e14) break;
        }
        if (!accepted) {
            converged = true; // cannot improve: local minimum to working precision
            message = "no further cost reduction possible";
            break;
        }
        if (step.norm() <= opt.step_tol * (x.norm() + opt.step_tol)) {
            converged = true;
            message = "step below tolerance";
            break;
        }
    }
    if (!converged) message = "iteration limit reached";

    // Covariance from the pseudo-inverse of J^T J at the optimum, scaled by
    // the reduced chi-square when the system is overdetermined.
    jac = fd_jacobian(fn, x, opt.fd_step_rel, opt.fd_step_min);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double tol = 1e-12 * svd.singularValues().maxCoeff();
    Eigen::VectorXd inv_sv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv_sv.size(); ++i) {
        inv_sv(i) = inv_sv(i) > tol ? 1.0 / inv_sv(i) : 0.0;
    }
    Eigen::MatrixXd cov = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    if (m > n) cov *= 2.0 * cost / static_cast<double>(m - n);
    out.covariance = 0.5 * (cov + cov.transpose());

    const double max_col = jac.colwise().norm().maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (jac.col(j).norm() < 1e-10 * std::max(max_col, 1e-300)) {
            out.unidentifiable.push_back(static_cast<int>(j));
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double scale = std::max(1.0, std::abs(x(j)));
        if (opt.lower.size() == n && std::abs(x(j) - opt.lower(j)) < 1e-9 * scale) {
            out.at_bound.push_back(static_cast<int>(j));
        } else if (opt.upper.size() == n && std::abs(x(j) - opt.upper(j)) < 1e-9 * scale) {
            out.at_bound.push_back(static_cast<int>(j));
        }
    }

    out.params = std::move(x);
    out.residual_norm = std::sqrt(2.0 * cost);
    out.iterations = iter;
    out.converged = converged;
    out.message = message;
    return out;
}

// ---------------------------------------------------------------------------

FitResult fit_exponential(const DecayTrace& trace) {
    trace.validate();
    const auto& t = trace.times_s;
    const auto& y = trace.values;
    const auto w = weights_for(trace);
    const std::size_t n = y.size();

    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
    if (*ymax_it - *ymin_it <= 1e-12 * std::max(1.0, std::abs(*ymax_it))) {
        FitResult r;
        r.names = {"amplitude", "tau_s", "offset"};
        r.values = Eigen::VectorXd::Zero(3);
        r.converged = false;
        r.message = "degenerate trace: no decay signal to fit";
        r.flags.push_back("degenerate_input");
        return r;
    }

    // Initial guess: offset from the tail, amplitude from the head, tau from
    // the 1/e crossing of the offset-subtracted signal.
    const std::size_t tail = std::max<std::size_t>(3, n / 10);
    double c0 = std::accumulate(y.end() - static_cast<long>(tail), y.end(), 0.0) / tail;
    double a0 = y.front() - c0;
    if (std::abs(a0) < 1e-12 * (*ymax_it - *ymin_it)) a0 = *ymax_it - *ymin_it;
    std::vector<double> shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = (y[i] - c0) / a0;
    double tau0 = interpolate_crossing(t, shifted, std::exp(-1.0));
    if (!(tau0 > 0.0)) tau0 = (t.back() - t.front()) / 3.0;

    const auto residuals = [&](const Eigen::VectorXd& p) {
        const double amp = p(0), tau = std::exp(p(1)), c = p(2);
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            r(static_cast<Eigen::Index>(i)) = (amp * std::exp(-t[i] / tau) + c - y[i]) * w[i];
        }
        return r;
    };

    Eigen::VectorXd p0(3);
    p0 << a0, std::log(tau0), c0;
    const LmOutcome out = levenberg_marquardt(residuals, p0);

    FitResult r = pack_result(out, {"amplitude", "tau_s", "offset"});
    delogify(r, 1);
    const double tau = r.param("tau_s");
    if (t.back() - t.front() < 2.0 * tau) {
        r.flags.push_back("short_span");
        r.message += (r.message.empty() ? "" : "; ") +
                     std::string("trace spans less than 2 fitted lifetimes");
    }
    return r;
}

FitResult fit_mims(const DecayTrace& trace, EchoMode mode, std::optional<double> fix_x) {
    trace.validate();
    const auto& t = trace.times_s;
    const auto& y = trace.values;
    const auto w = weights_for(trace);
    const std::size_t n = y.size();
    if (t.front() < 0.0) throw std::invalid_argument("fit_mims: delays must be >= 0");
    if (fix_x && !(*fix_x >= 0.5 && *fix_x <= 4.0)) {
        throw std::invalid_argument("fit_mims: fixed x outside [0.5, 4]");
    }

    // Heuristics operate on the field amplitude.
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = mode == EchoMode::intensity ? std::sqrt(std::max(y[i], 0.0)) : y[i];
    }
    const double e0_guess = *std::max_element(z.begin(), z.end());
    if (!(e0_guess > 0.0)) {
        FitResult r;
        r.names = {"e0", "tm_s", "x"};
        r.values = Eigen::VectorXd::Zero(3);
        r.converged = false;
        r.message = "degenerate trace: no positive echo amplitude";
        r.flags.push_back("degenerate_input");
        return r;
    }
    std::vector<double> norm(n);
    for (std::size_t i = 0; i < n; ++i) norm[i] = z[i] / e0_guess;
    double te = interpolate_crossing(t, norm, std::exp(-1.0));
    if (!(te > 0.0)) te = (t.back() + t.front()) / 2.0;
    const double tm0 = 2.0 * te;

    const bool fit_x = !fix_x.has_value();
    const auto residuals = [&](const Eigen::VectorXd& p) {
        const double e0 = p(0), tm = std::exp(p(1));
        const double x = fit_x ? p(2) : *fix_x;
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            double model = e0 * std::exp(-std::pow(2.0 * t[i] / tm, x));
            if (mode == EchoMode::intensity) model *= model;
            r(static_cast<Eigen::Index>(i)) = (model - y[i]) * w[i];
        }
        return r;
    };

    LmOptions opt;
    const Eigen::Index np = fit_x ? 3 : 2;
    if (fit_x) {
        opt.lower = Eigen::VectorXd::Constant(3, -std::numeric_limits<double>::infinity());
        opt.upper = Eigen::VectorXd::Constant(3, std::numeric_limits<double>::infinity());
        opt.lower(2) = 0.5;
        opt.upper(2) = 4.0;
    }

    // The stretch exponent gives the cost surface long shallow valleys; a few
    // deterministic starts keep the fit out of the wrong one.
    const std::vector<double> x_starts = fit_x ? std::vector<double>{1.0, 1.8, 3.0}
                                               : std::vector<double>{*fix_x};
    LmOutcome best;
    bool have_best = false;
    for (double xs : x_starts) {
        Eigen::VectorXd p0(np);
        p0(0) = e0_guess;
        p0(1) = std::log(tm0);
        if (fit_x) p0(2) = xs;
        const LmOutcome out = levenberg_marquardt(residuals, p0, opt);
        if (!have_best || out.residual_norm < best.residual_norm) {
            best = out;
            have_best = true;
        }
    }

    FitResult r;
    if (fit_x) {
        r = pack_result(best, {"e0", "tm_s", "x"});
    } else {
        // Re-inflate to the full parameter list with x fixed.
        LmOutcome padded = best;
        padded.params.conservativeResize(3);
        padded.params(2) = *fix_x;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
        cov.topLeftCorner(2, 2) = best.covariance;
        padded.covariance = cov;
        r = pack_result(padded, {"e0", "tm_s", "x"});
        r.flags.push_back("x_fixed");
    }
    delogify(r, 1);
    const double x_final = r.param("x");
    if (fit_x && (std::abs(x_final - 0.5) < 1e-6 || std::abs(x_final - 4.0) < 1e-6)) {
        r.flags.push_back("x_at_bound");
        r.message += (r.message.empty() ? "" : "; ") +
                     std::string("stretch exponent pinned at a physical bound");
    }
    return r;
}

double effective_linewidth(double tm_s) {
    if (!(tm_s > 0.0)) throw std::invalid_argument("effective_linewidth: Tm must be positive");
    return 1.0 / (std::numbers::pi * tm_s);
}

FitResult fit_lorentzian(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 7) {
        throw std::invalid_argument("fit_lorentzian: need at least 7 (x, y) points");
    }
    const std::size_t n = xs.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

    double c0 = ys[order[0]];
    for (std::size_t i : order) c0 = std::min(c0, ys[i]);
    std::size_t peak_rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (ys[order[k]] > ys[order[peak_rank]]) peak_rank = k;
    }
    const double h0 = ys[order[peak_rank]] - c0;
    const double x00 = xs[order[peak_rank]];
    if (!(h0 > 0.0)) {
        FitResult r;
        r.names = {"center", "fwhm", "height", "offset"};
        r.values = Eigen::VectorXd::Zero(4);
        r.converged = false;
        r.message = "degenerate data: no peak above the baseline";
        r.flags.push_back("degenerate_input");
        return r;
    }

    const double half = c0 + h0 / 2.0;
    double left = xs[order.front()], right = xs[order.back()];
    for (std::size_t k = peak_rank; k-- > 0;) {
        if (ys[order[k]] <= half) {
            left = xs[order[k]];
            break;
        }
    }
    for (std::size_t k = peak_rank + 1; k < n; ++k) {
        if (ys[order[k]] <= half) {
            right = xs[order[k]];
            break;
        }
    }
    double fwhm0 = right - left;
    if (!(fwhm0 > 0.0)) fwhm0 = (xs[order.back()] - xs[order.front()]) / 4.0;

    const auto residuals = [&](const Eigen::VectorXd& p) {
        const double x0 = p(0), hw = std::exp(p(1)) / 2.0, h = p(2), c = p(3);
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = xs[i] - x0;
            r(static_cast<Eigen::Index>(i)) = h * hw * hw / (dx * dx + hw * hw) + c - ys[i];
        }
        return r;
    };

    Eigen::VectorXd p0(4);
    p0 << x00, std::log(fwhm0), h0, c0;
    const LmOutcome out = levenberg_marquardt(residuals, p0);
    FitResult r = pack_result(out, {"center", "fwhm", "height", "offset"});
    delogify(r, 1);
    return r;
}

// ---------------------------------------------------------------------------

void PeakObservation::validate() const {
    if (!(uncertainty_ghz > 0.0)) {
        throw std::invalid_argument("PeakObservation: uncertainty must be positive");
    }
    const bool both_set = ground_index != 0 && excited_index != 0;
    const bool both_unset = ground_index == 0 && excited_index == 0;
    if (!both_set && !both_unset) {
        throw std::invalid_argument("PeakObservation: assign both level indices or neither");
    }
    if (both_set && (ground_index < 1 || ground_index > 4 || excited_index < 1 || excited_index > 4)) {
        throw std::invalid_argument("PeakObservation: level indices must be in 1..4");
    }
}

Assignment line_assignment(std::span<const PeakObservation> observations,
                           std::span<const TransitionLine> predicted, double gate_sigmas) {
    struct Candidate {
        double dist;
        double line_freq;
        double obs_freq;
        std::size_t obs;
        std::size_t line;
    };
    std::vector<Candidate> candidates;
    for (std::size_t oi = 0; oi < observations.size(); ++oi) {
        const auto& obs = observations[oi];
        obs.validate();
        const double gate = gate_sigmas * obs.uncertainty_ghz;
        for (std::size_t li = 0; li < predicted.size(); ++li) {
            const auto& line = predicted[li];
            if (line.forbidden || line.pol != obs.pol) continue;
            const double d = std::abs(line.freq_ghz - obs.freq_ghz);
            if (d <= gate) candidates.push_back({d, line.freq_ghz, obs.freq_ghz, oi, li});
        }
    }
    // Order by distance with value-based tie-breaks so the matching does not
    // depend on the order observations arrive in.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.line_freq != b.line_freq) return a.line_freq < b.line_freq;
        return a.obs_freq < b.obs_freq;
    });

    Assignment result;
    result.line_for_obs.assign(observations.size(), -1);
    std::vector<bool> line_taken(predicted.size(), false);
    std::map<std::size_t, int> per_line_hits;
    for (const auto& c : candidates) {
        ++per_line_hits[c.line];
        if (result.line_for_obs[c.obs] == -1 && !line_taken[c.line]) {
            result.line_for_obs[c.obs] = static_cast<int>(c.line);
            line_taken[c.line] = true;
        }
    }

    std::set<std::size_t> ambiguous;
    for (std::size_t oi = 0; oi < observations.size(); ++oi) {
        if (result.line_for_obs[oi] == -1) result.unmatched.push_back(static_cast<int>(oi));
        // An observation within 2 sigma of two predictions is ambiguous.
        const auto& obs = observations[oi];
        int close = 0;
        for (const auto& line : predicted) {
            if (line.forbidden || line.pol != obs.pol) continue;
            if (std::abs(line.freq_ghz - obs.freq_ghz) <= 2.0 * obs.uncertainty_ghz) ++close;
        }
        if (close >= 2) ambiguous.insert(oi);
    }
    for (const auto& [li, hits] : per_line_hits) {
        if (hits < 2) continue;
        for (const auto& c : candidates) {
            if (c.line == li) ambiguous.insert(c.obs);
        }
    }
    result.ambiguous.assign(ambiguous.begin(), ambiguous.end());
    return result;
}

FitResult fit_spin_hamiltonian(std::span<const PeakObservation> observations,
                               const ManifoldParams& ground, const ManifoldParams& excited_guess,
                               const PhysicalConstants& consts,
                               std::span<const TransitionMoment> moments, NuclearZeeman mode,
                               const SpinHamFitOptions& options) {
    for (const auto& obs : observations) obs.validate();

    std::vector<FieldVector> distinct_fields;
    for (const auto& obs : observations) {
        const bool seen = std::any_of(distinct_fields.begin(), distinct_fields.end(),
                                      [&](const FieldVector& f) { return same_field(f, obs.field, 1e-9); });
        if (!seen) distinct_fields.push_back(obs.field);
    }
    const bool all_zero_field = distinct_fields.size() == 1 && distinct_fields.front().magnitude() < 1e-12;
    if (observations.size() < 5 || (distinct_fields.size() < 2 && !(all_zero_field && observations.size() >= 4))) {
        throw std::invalid_argument(
            "fit_spin_hamiltonian: need >= 5 observations spanning >= 2 fields, or >= 4 zero-field lines");
    }

    FitResult result;

    // Resolve level assignments for unassigned observations against the
    // initial-guess catalog, one field at a time.
    struct Working {
        FieldVector field;
        Polarization pol;
        double freq;
        double weight;
        int gidx;
        int eidx;
    };
    const SpinSystem guess_system{ground, excited_guess, consts, mode};
    std::vector<Working> work;
    std::vector<int> dropped;
    for (std::size_t oi = 0; oi < observations.size(); ++oi) {
        const auto& obs = observations[oi];
        if (obs.ground_index != 0) {
            work.push_back({obs.field, obs.pol, obs.freq_ghz, 1.0 / obs.uncertainty_ghz,
                            obs.ground_index, obs.excited_index});
            continue;
        }
        const auto catalog = catalog_at(guess_system, obs.field, moments);
        const Assignment match =
            line_assignment({&obs, 1}, catalog, options.assignment_gate_sigmas);
        if (!match.ambiguous.empty() && !result.has_flag("assignment_ambiguity")) {
            result.flags.push_back("assignment_ambiguity");
        }
        if (match.line_for_obs[0] < 0) {
            dropped.push_back(static_cast<int>(oi));
            continue;
        }
        const auto& line = catalog[static_cast<std::size_t>(match.line_for_obs[0])];
        work.push_back({obs.field, obs.pol, obs.freq_ghz, 1.0 / obs.uncertainty_ghz,
                        line.ground_index, line.excited_index});
    }
    if (!dropped.empty()) {
        result.flags.push_back("unmatched_observations");
        result.message = std::to_string(dropped.size()) +
                         " observation(s) matched no predicted line and were excluded";
        if (work.size() < 5) {
            throw std::invalid_argument(
                "fit_spin_hamiltonian: too few assignable observations after matching");
        }
    }

    // Ground levels vary per field but not with the fit parameters.
    std::vector<FieldVector> fields;
    std::vector<std::array<double, 4>> ground_energies;
    std::vector<int> field_of_obs(work.size());
    for (std::size_t k = 0; k < work.size(); ++k) {
        int fi = -1;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (same_field(fields[f], work[k].field, 1e-9)) {
                fi = static_cast<int>(f);
                break;
            }
        }
        if (fi < 0) {
            fields.push_back(work[k].field);
            ground_energies.push_back(solve_levels(ground, work[k].field, consts, mode).energies);
            fi = static_cast<int>(fields.size()) - 1;
        }
        field_of_obs[k] = fi;
    }

    const double offset0 = excited_guess.optical_offset_ghz - ground.optical_offset_ghz;
    const auto residuals = [&](const Eigen::VectorXd& p) {
        ManifoldParams trial = excited_guess;
        trial.a.parallel = p(0);
        trial.a.perpendicular = p(1);
        trial.g.parallel = p(2);
        trial.g.perpendicular = p(3);
        std::vector<std::array<double, 4>> excited_energies(fields.size());
        for (std::size_t f = 0; f < fields.size(); ++f) {
            excited_energies[f] = solve_levels(trial, fields[f], consts, mode).energies;
        }
        Eigen::VectorXd r(static_cast<Eigen::Index>(work.size()));
        for (std::size_t k = 0; k < work.size(); ++k) {
            const auto f = static_cast<std::size_t>(field_of_obs[k]);
            const double predicted =
                excited_energies[f][static_cast<std::size_t>(work[k].eidx - 1)] -
                ground_energies[f][static_cast<std::size_t>(work[k].gidx - 1)] + p(4);
            r(static_cast<Eigen::Index>(k)) = (predicted - work[k].freq) * work[k].weight;
        }
        return r;
    };

    Eigen::VectorXd p0(5);
    p0 << excited_guess.a.parallel, excited_guess.a.perpendicular, excited_guess.g.parallel,
        excited_guess.g.perpendicular, offset0;
    const LmOutcome out = levenberg_marquardt(residuals, p0, options.lm);

    const std::vector<std::string> names{"a_par_ghz", "a_perp_ghz", "g_par", "g_perp", "offset_ghz"};
    FitResult packed = pack_result(out, names);
    packed.flags = result.flags;
    if (!result.message.empty()) {
        packed.message = result.message + (packed.message.empty() ? "" : "; " + packed.message);
    }
    for (int j : out.unidentifiable) {
        packed.flags.push_back("unidentifiable:" + names[static_cast<std::size_t>(j)]);
    }
    if (!out.unidentifiable.empty()) packed.flags.push_back("rank_deficient");
    return packed;
}

} // namespace ybspin
