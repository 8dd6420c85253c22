#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "ybspin/constants.hpp"

namespace ybspin {

using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

enum class Manifold { ground, excited };

/// How the nuclear Zeeman interaction -mu_n g_n B·I enters the Hamiltonian.
/// `folded` drops the explicit term: the effective electronic g values are
/// understood to absorb it. `explicit_term` keeps it with the configured g_n.
enum class NuclearZeeman { folded, explicit_term };

/// Axially symmetric rank-2 tensor, stored as (parallel, perpendicular)
/// principal values relative to the crystal c-axis. Signs are carried.
struct AxialTensor {
    double parallel = 0.0;
    double perpendicular = 0.0;
};

/// Effective-spin parameters of one Kramers doublet coupled to an I=1/2
/// nucleus: electronic Zeeman tensor g, hyperfine tensor A (GHz), nuclear
/// g-factor, and the optical frequency of the manifold centroid (GHz).
struct ManifoldParams {
    AxialTensor g;
    AxialTensor a;
    double gn = 0.0;
    double optical_offset_ghz = 0.0;
    Manifold label = Manifold::ground;

    void validate() const;
};

/// Static magnetic field in Tesla; z is the crystal c-axis.
struct FieldVector {
    double bx = 0.0;
    double by = 0.0;
    double bz = 0.0;

    double magnitude() const { return std::sqrt(bx * bx + by * by + bz * bz); }
    double transverse() const { return std::sqrt(bx * bx + by * by); }
    FieldVector operator-() const { return {-bx, -by, -bz}; }
    static FieldVector along_c(double b) { return {0.0, 0.0, b}; }
};

bool same_field(const FieldVector& a, const FieldVector& b, double tol_t = 1e-12);

/// Spin-1/2 operators on the 4-dimensional product space, basis order
/// |uU>, |uD>, |dU>, |dD> (electron arrow first, nucleus second).
struct SpinOperators {
    Matrix4c sx, sy, sz; // electron
    Matrix4c ix, iy, iz; // nucleus
};

SpinOperators spin_operators();

/// Eigenvalues (GHz, ascending) and eigenstates of one manifold at a field.
struct LevelSet {
    std::array<double, 4> energies{};
    std::array<Vector4c, 4> states{};
    std::array<std::string, 4> labels{};
    FieldVector field;
    Manifold manifold = Manifold::ground;
};

/// H/h in GHz:
///   mu_B/h [ g_perp (Bx Sx + By Sy) + g_par Bz Sz ]
/// + A_par Iz Sz + A_perp (Ix Sx + Iy Sy)
/// - mu_n/h g_n (Bx Ix + By Iy + Bz Iz)        (explicit_term mode only)
Matrix4c build_hamiltonian(const ManifoldParams& p, const FieldVector& b,
                           const PhysicalConstants& consts,
                           NuclearZeeman mode = NuclearZeeman::folded);

/// Diagonalize a Hermitian 4x4, GHz units. Energies ascending; each
/// eigenvector's global phase is fixed by making its largest-magnitude
/// component real positive. Throws if the input is not Hermitian to 1e-10.
LevelSet eigensolve(const Matrix4c& h, const FieldVector& field, Manifold manifold);

/// Convenience: build_hamiltonian + eigensolve.
LevelSet solve_levels(const ManifoldParams& p, const FieldVector& b,
                      const PhysicalConstants& consts,
                      NuclearZeeman mode = NuclearZeeman::folded);

/// Zero-field eigenvalues { A_par/4, A_par/4, (-A_par + 2 A_perp)/4,
/// (-A_par - 2 A_perp)/4 }, sorted ascending.
std::array<double, 4> zero_field_levels(const AxialTensor& a);

struct LabeledState {
    std::string label;
    Vector4c state;
};

/// Analytic zero-field eigenstates numbered |1>..|4> from lowest to highest
/// energy. Supports the two sign patterns realized by the ground
/// (A_par < 0 < A_perp, |A_par| > A_perp) and excited
/// (A_par > A_perp > 0) manifolds; anything else is rejected.
std::array<LabeledState, 4> zero_field_states(Manifold manifold, const AxialTensor& a);

/// Label each level of a high-field LevelSet (B along c, electronic Zeeman
/// at least 5x the largest hyperfine component) with the primed product-state
/// name |1'>..|4'> of maximal overlap. The primed ordering assumes g_par < 0
/// for the ground manifold and g_par > 0 for the excited one. Refuses to
/// label when the best overlap probability is below 0.8.
std::array<std::string, 4> high_field_labels(const LevelSet& levels, const ManifoldParams& p,
                                             const PhysicalConstants& consts);

/// Hyperfine splitting estimate for another isotope: both components scaled
/// by the ratio of nuclear magnetic moments. A splitting estimate only; no
/// operators beyond I=1/2 are constructed.
AxialTensor scale_hyperfine_isotope(const AxialTensor& a, double moment_ratio);

/// One two-manifold spin system: everything needed to solve levels anywhere.
struct SpinSystem {
    ManifoldParams ground;
    ManifoldParams excited;
    PhysicalConstants consts;
    NuclearZeeman mode = NuclearZeeman::folded;

    const ManifoldParams& params(Manifold m) const {
        return m == Manifold::ground ? ground : excited;
    }
    LevelSet solve(Manifold m, const FieldVector& b) const {
        return solve_levels(params(m), b, consts, mode);
    }
};

} // namespace ybspin
