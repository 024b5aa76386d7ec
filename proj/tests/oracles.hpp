#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "layered/models.hpp"

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Mat sx() { Mat s(2, 2); s << 0, 1, 1, 0; return s; }
inline Mat sy() { Mat s(2, 2); s << 0, cd(0, -1), cd(0, 1), 0; return s; }
inline Mat sz() { Mat s(2, 2); s << 1, 0, 0, -1; return s; }
inline Mat sigma(int i) { return i == 1 ? sx() : (i == 2 ? sy() : sz()); }

// Layered Hamiltonian written site by site: (layer l, sublattice A/B).
inline Mat layered(const layered::FieldVector& h, layered::Stacking st, int n, double t) {
    Mat H = Mat::Zero(2 * n, 2 * n);
    Mat id = Mat::Identity(n, n);
    H += h.h1 * kron(id, sx()) + h.h2 * kron(id, sy()) + h.h3 * kron(id, sz());
    auto A = [](int l) { return 2 * l; };
    auto B = [](int l) { return 2 * l + 1; };
    for (int l = 0; l + 1 < n; ++l) {
        if (st == layered::Stacking::ABBA) {
            H(A(l), B(l + 1)) += t; H(B(l + 1), A(l)) += t;
            H(B(l), A(l + 1)) += t; H(A(l + 1), B(l)) += t;
        } else if (l % 2 == 0) {
            // 1B-2A, 3B-4A, ...
            H(B(l), A(l + 1)) += t; H(A(l + 1), B(l)) += t;
        } else {
            // 2A-3B, 4A-5B, ...
            H(A(l), B(l + 1)) += t; H(B(l + 1), A(l)) += t;
        }
    }
    return H;
}

// exp(-i H dt) by a truncated Taylor series (no eigensolver involved).
inline Mat taylor_propagator(const Mat& H, double dt, int terms = 24) {
    Mat U = Mat::Identity(H.rows(), H.cols());
    Mat term = U;
    for (int n = 1; n <= terms; ++n) {
        term = term * H * cd(0, -dt) / static_cast<double>(n);
        U += term;
    }
    return U;
}

// (1/T) int_0^T Tr[rho(t) O] dt, trapezoid rule.
inline double time_integrated_average(const Mat& H, const Mat& rho0, const Mat& O, double T = 2000.0,
                                      double dt = 0.01) {
    Mat U = taylor_propagator(H, dt);
    Mat Ud = U.adjoint();
    Mat rho = rho0;
    const long steps = std::lround(T / dt);
    double acc = 0.5 * (rho * O).trace().real();
    for (long s = 1; s <= steps; ++s) {
        rho = U * rho * Ud;
        double f = (rho * O).trace().real();
        acc += (s == steps ? 0.5 : 1.0) * f;
    }
    return acc * dt / T;
}

// Degree of k -> h/|h| for h = (sin kx + c, sin ky, m - cos kx - cos ky),
// counted from preimages of the south pole: minus the sum of sign(det J) over
// zeros of (h1, h2) where h3 < 0.
inline int shifted_qwz_degree(double m, double c) {
    if (std::abs(c) > 1.0) return 0;
    const double pi = std::numbers::pi;
    double k0 = std::asin(-c);
    double xs[2] = {k0, pi - k0};
    int deg = 0;
    for (double kx : xs) {
        if (std::abs(c) == 1.0 && kx != xs[0]) continue;
        for (double ky : {0.0, pi}) {
            double h3 = m - std::cos(kx) - std::cos(ky);
            if (h3 < 0.0) deg -= (std::cos(kx) * std::cos(ky) > 0.0) ? 1 : -1;
        }
    }
    return deg;
}

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611ULL);
    return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

}  // namespace oracle
