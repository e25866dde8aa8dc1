#include "drfr/psd.hpp"

#include <algorithm>
#include <cmath>

#include "drfr/error.hpp"

namespace drfr {
namespace {

void require_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("matrix must be square");
    if (m.size() == 0) throw InvalidArgument("matrix must be non-empty");
    if (!m.allFinite()) throw InvalidArgument("matrix must be finite");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw InvalidArgument("matrix must be symmetric");
    }
}

}  // namespace

Matrix psd_project(const Matrix& m) {
    require_symmetric(m);
    const Matrix sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    // Eigenvalues come sorted ascending.
    if (eig.eigenvalues()(0) >= 0.0) return sym;
    const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
    Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose());
}

double min_eigenvalue(const Matrix& symmetric) {
    require_symmetric(symmetric);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    return eig.eigenvalues()(0);
}

Matrix psd_factor(const Matrix& m) {
    require_symmetric(m);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace drfr
