#pragma once

// Test-only reference implementations, kept independent of the library paths
// they check.

#include <algorithm>
#include <array>
#include <complex>
#include <random>

#include <Eigen/Dense>

namespace oracles {

/// Characteristic polynomial coefficients of a 4x4 matrix via the
/// Faddeev-LeVerrier recursion: det(lambda I - A) = lambda^4 + a3 lambda^3
/// + a2 lambda^2 + a1 lambda + a0.
inline std::array<double, 4> char_poly(const Eigen::Matrix4cd& a) {
    using M = Eigen::Matrix4cd;
    const M id = M::Identity();
    M m = id;
    std::array<double, 4> coef{}; // a3, a2, a1, a0
    double ak = 1.0;
    for (int k = 1; k <= 4; ++k) {
        if (k > 1) m = M(a * m) + ak * id;
        ak = -(a * m).trace().real() / k;
        coef[static_cast<std::size_t>(k - 1)] = ak;
    }
    return {coef[0], coef[1], coef[2], coef[3]};
}

/// Durand-Kerner root finder for the quartic above. For Hermitian input all
/// roots are real; returns them sorted ascending.
inline std::array<double, 4> eigenvalues_by_char_poly(const Eigen::Matrix4cd& a) {
    const auto c = char_poly(a);
    const auto eval = [&](std::complex<double> z) {
        return (((z + c[0]) * z + c[1]) * z + c[2]) * z + c[3];
    };

    double radius = 1.0;
    for (double ci : c) radius = std::max(radius, std::abs(ci));
    radius += 1.0;

    std::array<std::complex<double>, 4> z;
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> zk = 1.0;
    for (auto& zi : z) {
        zk *= seed;
        zi = radius * zk;
    }
    for (int iter = 0; iter < 1000; ++iter) {
        double worst = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < 4; ++j) {
                if (j != i) denom *= z[i] - z[j];
            }
            const std::complex<double> delta = eval(z[i]) / denom;
            z[i] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < 1e-14 * radius) break;
    }
    std::array<double, 4> out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = z[i].real();
    std::sort(out.begin(), out.end());
    return out;
}

inline Eigen::Matrix4cd random_hermitian(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i) {
        m(i, i) = u(rng);
        for (int j = i + 1; j < 4; ++j) {
            m(i, j) = std::complex<double>(u(rng), u(rng));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

/// Five-point-stencil Jacobian, a higher-order check on the optimizer's
/// central-difference path.
template <typename Fn>
Eigen::MatrixXd jacobian_5point(const Fn& fn, const Eigen::VectorXd& x, double h) {
    const Eigen::VectorXd r0 = fn(x);
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        auto at = [&](double delta) {
            Eigen::VectorXd xs = x;
            xs(j) += delta;
            return fn(xs);
        };
        jac.col(j) = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
    }
    return jac;
}

} // namespace oracles
