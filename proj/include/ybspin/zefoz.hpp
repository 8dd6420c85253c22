#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ybspin/spin_system.hpp"

namespace ybspin {

/// A transition between two hyperfine levels, possibly across manifolds.
struct TransitionSpec {
    Manifold manifold_a = Manifold::ground;
    int level_a = 1;
    Manifold manifold_b = Manifold::ground;
    int level_b = 2;

    void validate() const;
};

/// E_b - E_a in GHz at a field, levels tracked by sorted index. Manifold
/// optical offsets are included when the manifolds differ.
double transition_frequency(const TransitionSpec& spec, const SpinSystem& system,
                            const FieldVector& b);

struct GradientResult {
    Eigen::Vector3d gradient_ghz_per_t = Eigen::Vector3d::Zero();
    bool degenerate = false; // a level gap collapsed inside the stencil
    double min_gap_ghz = 0.0;
};

/// dnu/dB by per-axis central differences with Richardson extrapolation
/// (steps h and h/2). Sorted-index level tracking breaks at crossings, so the
/// result is flagged when any gap adjacent to the tracked levels falls below
/// 10 kHz anywhere on the stencil.
GradientResult frequency_gradient(const TransitionSpec& spec, const SpinSystem& system,
                                  const FieldVector& b, double step_t = 1e-3);

struct ZefozReport {
    FieldVector field;
    double freq_ghz = 0.0;
    Eigen::Vector3d gradient_ghz_per_t = Eigen::Vector3d::Zero();
    Eigen::Matrix3d hessian_ghz_per_t2 = Eigen::Matrix3d::Zero();
    double gradient_norm = 0.0;
};

struct ZefozOptions {
    double step_t = 1e-3;
    double gradient_threshold_ghz_per_t = 1e-4;
    double dedup_radius_t = 1e-3;
    unsigned long long seed = 0;
};

/// Multi-start search for fields where |dnu/dB| vanishes, inside an axis-
/// aligned box. Minima are re-verified at an independent step size,
/// deduplicated within dedup_radius, and reported with the local curvature.
/// An empty result list is a valid outcome.
std::vector<ZefozReport> zefoz_search(const TransitionSpec& spec, const SpinSystem& system,
                                      const Eigen::Vector3d& box_lo, const Eigen::Vector3d& box_hi,
                                      int seeds, const ZefozOptions& options = {});

} // namespace ybspin
