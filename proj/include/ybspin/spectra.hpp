#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ybspin/spin_system.hpp"

namespace ybspin {

enum class Polarization { pi, sigma };

const char* to_string(Polarization pol);
Polarization polarization_from_string(const std::string& s);

/// Optical transition moment in electron pseudo-spin space. m(s_e, s_g) maps
/// the ground doublet component s_g to the excited component s_e; the nuclear
/// spin is untouched.
struct TransitionMoment {
    Polarization pol = Polarization::pi;
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
};

/// Electron-spin-conserving pi moment and spin-flipping sigma moment, the
/// minimal uniaxial-site model reproducing the observed zero-field 3 pi /
/// 4 sigma line pattern.
std::vector<TransitionMoment> default_moments(double pi_amplitude, double sigma_amplitude);

/// One optical-hyperfine line. `pairs` lists every (ground, excited) level
/// pair merged into the line; gi/gj count the distinct ground/excited levels.
struct TransitionLine {
    double freq_ghz = 0.0;
    Polarization pol = Polarization::pi;
    double amplitude = 0.0;
    int gi = 1;
    int gj = 1;
    int ground_index = 1;
    int excited_index = 1;
    std::vector<std::pair<int, int>> pairs;
    bool forbidden = false;
    std::string label;
};

struct CatalogOptions {
    bool merge = true;
    double merge_tol_ghz = 1e-3;
    double forbidden_rel = 1e-12;
};

/// Evaluate all 16 ground->excited pairs for every supplied polarization at
/// a common field. Amplitude = |<psi_e|(M ⊗ 1)|psi_g>|^2. Lines below
/// forbidden_rel of the catalog maximum are flagged forbidden; coincident
/// allowed lines (same polarization, frequencies within merge_tol) are merged
/// with summed amplitude when merging is enabled.
std::vector<TransitionLine> transition_catalog(const LevelSet& ground, const LevelSet& excited,
                                               std::span<const TransitionMoment> moments,
                                               double optical_offset_diff_ghz = 0.0,
                                               const CatalogOptions& opts = {});

/// Catalog at a field directly from system parameters (offsets included).
std::vector<TransitionLine> catalog_at(const SpinSystem& system, const FieldVector& b,
                                       std::span<const TransitionMoment> moments,
                                       const CatalogOptions& opts = {});

/// Letter entry of the level-pair adjacency table (A..I).
struct AdjacencyEntry {
    std::string letter;
    bool forbidden = false;
    Polarization pol = Polarization::pi;
    std::vector<std::pair<int, int>> pairs;
};

/// Attach letters to catalog lines whose pair sets are covered by an
/// adjacency entry of matching polarization.
void apply_line_labels(std::vector<TransitionLine>& catalog,
                       std::span<const AdjacencyEntry> adjacency);

std::array<double, 4> boltzmann_populations(const LevelSet& levels, double temperature_k,
                                            const PhysicalConstants& consts);

enum class LineshapeKind { gaussian, lorentzian };

struct LineshapeParams {
    LineshapeKind kind = LineshapeKind::gaussian;
    double fwhm_ghz = 0.275;
    std::map<std::string, double> per_line_fwhm_ghz; // keyed by line label

    void validate() const;
    double fwhm_for(const std::string& label) const;
};

/// Unit-integral lineshape value at detuning x from center.
double lineshape_value(LineshapeKind kind, double fwhm, double x);

struct Spectrum {
    std::vector<double> detunings_ghz;
    std::vector<double> alpha_per_cm;
    Polarization pol = Polarization::pi;
    FieldVector field;
    double temperature_k = 0.0;
    LineshapeParams shape;
};

std::vector<double> uniform_grid(double start, double stop, int n);

/// alpha(nu) = scale * sum over lines of amplitude * p(ground level) *
/// L(nu - freq). The grid must cover every allowed line center +-3 FWHM and
/// sample each FWHM with at least 8 points; require_coverage = false waives
/// the first check for windows that deliberately clip lines (ramp maps).
Spectrum synth_spectrum(std::span<const TransitionLine> catalog,
                        const std::array<double, 4>& populations, const LineshapeParams& shape,
                        double scale, std::vector<double> grid, Polarization pol,
                        bool require_coverage = true);

/// Rescale labeled lines so that synth_spectrum(scale=1) reproduces the given
/// per-line integrated areas; unlabeled lines are dropped to zero amplitude.
std::vector<TransitionLine> calibrate_line_areas(std::vector<TransitionLine> catalog,
                                                 const std::map<std::string, double>& area_by_label,
                                                 const std::array<double, 4>& populations);

struct RampMap {
    std::vector<double> fields_t;      // |B| per row
    std::vector<double> detunings_ghz; // shared column grid
    std::vector<std::vector<double>> alpha_per_cm;
    Polarization pol = Polarization::pi;
};

/// One synthesized spectrum per field magnitude along a fixed orientation;
/// rows are independent and identical to sequential per-field evaluation.
RampMap field_ramp_map(const SpinSystem& system, const Eigen::Vector3d& orientation,
                       std::span<const double> b_values_t,
                       std::span<const TransitionMoment> moments, const LineshapeParams& shape,
                       double temperature_k, std::vector<double> grid, Polarization pol,
                       double scale = 1.0);

/// Resolvable (non-forbidden) merged lines per ramp field value.
std::vector<std::vector<TransitionLine>> ramp_catalogs(const SpinSystem& system,
                                                       const Eigen::Vector3d& orientation,
                                                       std::span<const double> b_values_t,
                                                       std::span<const TransitionMoment> moments,
                                                       Polarization pol);

struct Peak {
    double center_ghz = 0.0;
    double height = 0.0;
    double fwhm_estimate_ghz = 0.0;
    double prominence = 0.0;
};

/// Local maxima above a prominence floor, centers refined by parabolic
/// interpolation. Requires a uniformly sampled spectrum.
std::vector<Peak> peak_find(const Spectrum& s, double min_prominence);

} // namespace ybspin
