#include "ybspin/spin_system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ybspin {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

const char* manifold_suffix(Manifold m) { return m == Manifold::ground ? "g" : "e"; }

Matrix4c kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Matrix4c out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

} // namespace

void ManifoldParams::validate() const {
    if (!std::isfinite(g.parallel) || !std::isfinite(g.perpendicular) ||
        !std::isfinite(a.parallel) || !std::isfinite(a.perpendicular)) {
        throw std::invalid_argument("ManifoldParams: tensors must be finite");
    }
    if (!(std::abs(gn) < 10.0)) {
        throw std::invalid_argument("ManifoldParams: |g_n| must be below 10");
    }
}

bool same_field(const FieldVector& a, const FieldVector& b, double tol_t) {
    return std::abs(a.bx - b.bx) <= tol_t && std::abs(a.by - b.by) <= tol_t &&
           std::abs(a.bz - b.bz) <= tol_t;
}

SpinOperators spin_operators() {
    using namespace std::complex_literals;
    Eigen::Matrix2cd hx, hy, hz, id;
    hx << 0.0, 0.5, 0.5, 0.0;
    hy << 0.0, -0.5i, 0.5i, 0.0;
    hz << 0.5, 0.0, 0.0, -0.5;
    id.setIdentity();

    SpinOperators ops;
    ops.sx = kron2(hx, id);
    ops.sy = kron2(hy, id);
    ops.sz = kron2(hz, id);
    ops.ix = kron2(id, hx);
    ops.iy = kron2(id, hy);
    ops.iz = kron2(id, hz);
    return ops;
}

Matrix4c build_hamiltonian(const ManifoldParams& p, const FieldVector& b,
                           const PhysicalConstants& consts, NuclearZeeman mode) {
    const SpinOperators op = spin_operators();
    const double mu_b = consts.bohr_magneton_ghz_per_t;

    Matrix4c h = mu_b * (p.g.perpendicular * (b.bx * op.sx + b.by * op.sy) +
                         p.g.parallel * b.bz * op.sz);
    h += p.a.parallel * (op.iz * op.sz) + p.a.perpendicular * (op.ix * op.sx + op.iy * op.sy);
    if (mode == NuclearZeeman::explicit_term) {
        h -= consts.nuclear_magneton_ghz_per_t * p.gn * (b.bx * op.ix + b.by * op.iy + b.bz * op.iz);
    }
    // Symmetrize away the last bits of rounding noise from the products.
    return Matrix4c(0.5 * (h + h.adjoint()));
}

LevelSet eigensolve(const Matrix4c& h, const FieldVector& field, Manifold manifold) {
    const double herm_defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (herm_defect > 1e-10) {
        throw std::invalid_argument("eigensolve: input is not Hermitian (defect " +
                                    std::to_string(herm_defect) + " GHz)");
    }

    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigensolve: diagonalization failed");
    }

    LevelSet out;
    out.field = field;
    out.manifold = manifold;
    for (int i = 0; i < 4; ++i) {
        out.energies[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        Vector4c v = solver.eigenvectors().col(i);
        // Gauge: largest-magnitude component real positive; ties go to the
        // lowest index so the result is deterministic.
        int k = 0;
        double best = std::abs(v(0));
        for (int j = 1; j < 4; ++j) {
            if (std::abs(v(j)) > best + 1e-12) {
                best = std::abs(v(j));
                k = j;
            }
        }
        if (best > 0.0) v *= std::conj(v(k)) / std::abs(v(k));
        out.states[static_cast<std::size_t>(i)] = v;
        out.labels[static_cast<std::size_t>(i)] =
            "|" + std::to_string(i + 1) + ">" + manifold_suffix(manifold);
    }
    return out;
}

LevelSet solve_levels(const ManifoldParams& p, const FieldVector& b,
                      const PhysicalConstants& consts, NuclearZeeman mode) {
    return eigensolve(build_hamiltonian(p, b, consts, mode), b, p.label);
}

std::array<double, 4> zero_field_levels(const AxialTensor& a) {
    std::array<double, 4> e{a.parallel / 4.0, a.parallel / 4.0,
                            (-a.parallel + 2.0 * a.perpendicular) / 4.0,
                            (-a.parallel - 2.0 * a.perpendicular) / 4.0};
    std::sort(e.begin(), e.end());
    return e;
}

std::array<LabeledState, 4> zero_field_states(Manifold manifold, const AxialTensor& a) {
    const bool ground_pattern = manifold == Manifold::ground && a.parallel < 0.0 &&
                                a.perpendicular > 0.0 && std::abs(a.parallel) > a.perpendicular;
    const bool excited_pattern = manifold == Manifold::excited && a.parallel > 0.0 &&
                                 a.perpendicular > 0.0 && a.parallel > a.perpendicular;
    if (!ground_pattern && !excited_pattern) {
        throw std::invalid_argument(
            "zero_field_states: unsupported hyperfine sign pattern for this manifold; only "
            "ground (A_par < 0 < A_perp < |A_par|) and excited (0 < A_perp < A_par) have a "
            "defined labeling");
    }

    Vector4c up_up = Vector4c::Zero(), dn_dn = Vector4c::Zero();
    up_up(0) = 1.0;
    dn_dn(3) = 1.0;
    Vector4c antisym = Vector4c::Zero(), sym = Vector4c::Zero();
    antisym(1) = kInvSqrt2;
    antisym(2) = -kInvSqrt2;
    sym(1) = kInvSqrt2;
    sym(2) = kInvSqrt2;

    const LabeledState pair_lo{"uU", up_up};
    const LabeledState pair_hi{"dD", dn_dn};
    const LabeledState anti{"(uD-dU)/sqrt2", antisym};
    const LabeledState symm{"(uD+dU)/sqrt2", sym};

    // Energies: pair at A_par/4, antisym at (-A_par - 2 A_perp)/4,
    // sym at (-A_par + 2 A_perp)/4.
    if (ground_pattern) return {pair_lo, pair_hi, anti, symm};
    return {anti, symm, pair_lo, pair_hi};
}

std::array<std::string, 4> high_field_labels(const LevelSet& levels, const ManifoldParams& p,
                                             const PhysicalConstants& consts) {
    const FieldVector& b = levels.field;
    if (b.transverse() > 1e-9 * std::max(1.0, std::abs(b.bz))) {
        throw std::invalid_argument("high_field_labels: field must be along the c-axis");
    }
    const double zeeman = std::abs(p.g.parallel * consts.bohr_magneton_ghz_per_t * b.bz);
    const double hyperfine = std::max(std::abs(p.a.parallel), std::abs(p.a.perpendicular));
    if (!(zeeman > 5.0 * hyperfine)) {
        throw std::invalid_argument(
            "high_field_labels: electronic Zeeman energy does not dominate the hyperfine "
            "interaction (need |g_par mu_B B| > 5 max|A|)");
    }

    // Product-basis index -> primed label, numbered lowest to highest energy.
    // Ground assumes g_par < 0, excited g_par > 0.
    static constexpr std::array<int, 4> ground_primed{1, 2, 4, 3};  // uU uD dU dD
    static constexpr std::array<int, 4> excited_primed{4, 3, 1, 2};
    const auto& primed = p.label == Manifold::ground ? ground_primed : excited_primed;

    std::array<std::string, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        int k = 0;
        double best = 0.0;
        for (int j = 0; j < 4; ++j) {
            const double w = std::norm(levels.states[i](j));
            if (w > best) {
                best = w;
                k = j;
            }
        }
        if (best < 0.8) {
            throw std::runtime_error("high_field_labels: level " + std::to_string(i + 1) +
                                     " has no dominant product state (max overlap " +
                                     std::to_string(best) + " < 0.8)");
        }
        out[i] = "|" + std::to_string(primed[static_cast<std::size_t>(k)]) + "'>" +
                 manifold_suffix(p.label);
    }
    return out;
}

AxialTensor scale_hyperfine_isotope(const AxialTensor& a, double moment_ratio) {
    if (!std::isfinite(moment_ratio) || moment_ratio == 0.0) {
        throw std::invalid_argument("scale_hyperfine_isotope: moment ratio must be finite and nonzero");
    }
    return {a.parallel * moment_ratio, a.perpendicular * moment_ratio};
}

} // namespace ybspin
