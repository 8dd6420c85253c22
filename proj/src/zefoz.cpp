#include "ybspin/zefoz.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ybspin/fit.hpp"

namespace ybspin {

namespace {

constexpr double kDegeneracyGapGhz = 1e-5; // 10 kHz

FieldVector shifted(const FieldVector& b, int axis, double delta) {
    FieldVector out = b;
    if (axis == 0) out.bx += delta;
    if (axis == 1) out.by += delta;
    if (axis == 2) out.bz += delta;
    return out;
}

/// Smallest energy gap adjacent to a tracked level (sorted index, 1-based).
double adjacent_gap(const std::array<double, 4>& energies, int level) {
    double gap = std::numeric_limits<double>::infinity();
    const auto i = static_cast<std::size_t>(level - 1);
    if (i > 0) gap = std::min(gap, energies[i] - energies[i - 1]);
    if (i < 3) gap = std::min(gap, energies[i + 1] - energies[i]);
    return gap;
}

struct ProbedFrequency {
    double freq;
    double min_gap;
};

ProbedFrequency probe(const TransitionSpec& spec, const SpinSystem& system, const FieldVector& b) {
    const LevelSet la = system.solve(spec.manifold_a, b);
    const LevelSet lb = spec.manifold_b == spec.manifold_a ? la : system.solve(spec.manifold_b, b);
    double freq = lb.energies[static_cast<std::size_t>(spec.level_b - 1)] -
                  la.energies[static_cast<std::size_t>(spec.level_a - 1)];
    if (spec.manifold_b != spec.manifold_a) {
        freq += system.params(spec.manifold_b).optical_offset_ghz -
                system.params(spec.manifold_a).optical_offset_ghz;
    }
    const double gap = std::min(adjacent_gap(la.energies, spec.level_a),
                                adjacent_gap(lb.energies, spec.level_b));
    return {freq, gap};
}

} // namespace

void TransitionSpec::validate() const {
    if (level_a < 1 || level_a > 4 || level_b < 1 || level_b > 4) {
        throw std::invalid_argument("TransitionSpec: levels must be in 1..4");
    }
    if (manifold_a == manifold_b && level_a == level_b) {
        throw std::invalid_argument("TransitionSpec: the two (manifold, level) pairs must differ");
    }
}

double transition_frequency(const TransitionSpec& spec, const SpinSystem& system,
                            const FieldVector& b) {
    spec.validate();
    return probe(spec, system, b).freq;
}

GradientResult frequency_gradient(const TransitionSpec& spec, const SpinSystem& system,
                                  const FieldVector& b, double step_t) {
    spec.validate();
    if (!(step_t > 0.0)) throw std::invalid_argument("frequency_gradient: step must be positive");

    GradientResult result;
    result.min_gap_ghz = probe(spec, system, b).min_gap;
    for (int axis = 0; axis < 3; ++axis) {
        double diff[2]; // full step, half step
        for (int k = 0; k < 2; ++k) {
            const double h = step_t / (k + 1.0);
            const ProbedFrequency plus = probe(spec, system, shifted(b, axis, h));
            const ProbedFrequency minus = probe(spec, system, shifted(b, axis, -h));
            diff[k] = (plus.freq - minus.freq) / (2.0 * h);
            result.min_gap_ghz = std::min({result.min_gap_ghz, plus.min_gap, minus.min_gap});
        }
        // Richardson: central differences halve their h^2 error term.
        result.gradient_ghz_per_t(axis) = (4.0 * diff[1] - diff[0]) / 3.0;
    }
    result.degenerate = result.min_gap_ghz < kDegeneracyGapGhz;
    return result;
}

std::vector<ZefozReport> zefoz_search(const TransitionSpec& spec, const SpinSystem& system,
                                      const Eigen::Vector3d& box_lo, const Eigen::Vector3d& box_hi,
                                      int seeds, const ZefozOptions& options) {
    spec.validate();
    if (seeds < 1) throw std::invalid_argument("zefoz_search: need at least one start");
    for (int i = 0; i < 3; ++i) {
        if (!(box_hi(i) >= box_lo(i))) {
            throw std::invalid_argument("zefoz_search: empty search domain");
        }
    }

    LmOptions lm;
    lm.lower = box_lo;
    lm.upper = box_hi;
    lm.max_iterations = 100;
    const auto gradient_residual = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const FieldVector b{x(0), x(1), x(2)};
        return frequency_gradient(spec, system, b, options.step_t).gradient_ghz_per_t;
    };

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<ZefozReport> reports;
    for (int s = 0; s < seeds; ++s) {
        Eigen::VectorXd x0(3);
        if (s == 0) {
            x0 = 0.5 * (box_lo + box_hi); // always probe the box center
        } else {
            for (int i = 0; i < 3; ++i) {
                x0(i) = box_lo(i) + (box_hi(i) - box_lo(i)) * unit(rng);
            }
        }

        const LmOutcome out = levenberg_marquardt(gradient_residual, x0, lm);
        const FieldVector b{out.params(0), out.params(1), out.params(2)};

        // Re-verify with an independent step before accepting.
        const GradientResult check = frequency_gradient(spec, system, b, options.step_t * 0.37);
        if (check.degenerate) continue;
        const double norm = check.gradient_ghz_per_t.norm();
        if (!(norm < options.gradient_threshold_ghz_per_t)) continue;

        const Eigen::Vector3d bv(b.bx, b.by, b.bz);
        const bool duplicate =
            std::any_of(reports.begin(), reports.end(), [&](const ZefozReport& r) {
                return (Eigen::Vector3d(r.field.bx, r.field.by, r.field.bz) - bv).norm() <
                       options.dedup_radius_t;
            });
        if (duplicate) continue;

        ZefozReport report;
        report.field = b;
        report.freq_ghz = transition_frequency(spec, system, b);
        report.gradient_ghz_per_t = check.gradient_ghz_per_t;
        report.gradient_norm = norm;
        Eigen::Matrix3d hess;
        for (int j = 0; j < 3; ++j) {
            const double h = options.step_t;
            const GradientResult gp = frequency_gradient(spec, system, shifted(b, j, h), options.step_t);
            const GradientResult gm = frequency_gradient(spec, system, shifted(b, j, -h), options.step_t);
            hess.col(j) = (gp.gradient_ghz_per_t - gm.gradient_ghz_per_t) / (2.0 * h);
        }
        report.hessian_ghz_per_t2 = 0.5 * (hess + hess.transpose());
        reports.push_back(std::move(report));
    }

    std::sort(reports.begin(), reports.end(), [](const ZefozReport& a, const ZefozReport& b) {
        const double ma = FieldVector(a.field).magnitude();
        const double mb = FieldVector(b.field).magnitude();
        if (ma != mb) return ma < mb;
        return std::tie(a.field.bx, a.field.by, a.field.bz) <
               std::tie(b.field.bx, b.field.by, b.field.bz);
    });
    return reports;
}

} // namespace ybspin
