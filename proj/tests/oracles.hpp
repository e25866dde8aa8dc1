#pragma once

// Test-only reference implementations. Nothing here calls into the library's
// numerical code paths, so the checks stay independent of what they verify.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "drfr/model.hpp"

namespace oracle {

using drfr::Matrix;
using drfr::Vector;

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues ascending.
inline std::pair<Vector, Matrix> jacobi_eigen(Matrix a, int sweeps = 100) {
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    Vector values(n);
    Matrix vectors(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return {values, vectors};
}

// Eigen-clamp reconstruction built on the Jacobi solver.
inline Matrix clamp_psd(const Matrix& m) {
    auto [values, vectors] = jacobi_eigen(m);
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = std::max(values(i), 0.0);
    return vectors * values.asDiagonal() * vectors.transpose();
}

// d^T M d with M formed explicitly, element by element.
inline double quadratic_form(const Matrix& l, const Vector& a, const Vector& b) {
    const Matrix m = l.transpose() * l;
    const Vector d = a - b;
    double s = 0.0;
    for (Eigen::Index r = 0; r < d.size(); ++r)
        for (Eigen::Index c = 0; c < d.size(); ++c) s += d(r) * m(r, c) * d(c);
    return s;
}

inline double sq(double x) { return x * x; }

}  // namespace oracle
