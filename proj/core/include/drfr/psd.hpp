#pragma once

#include "drfr/model.hpp"

namespace drfr {

// Nearest PSD matrix in Frobenius norm: eigendecompose, clamp negative
// eigenvalues to zero, reconstruct. Throws InvalidArgument unless `m` is
// square and symmetric to 1e-9 (relative to its largest entry, floor 1).
Matrix psd_project(const Matrix& m);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& symmetric);

// A factor L with L^T L == m for a PSD matrix m (L = sqrt(Lambda) V^T).
Matrix psd_factor(const Matrix& m);

}  // namespace drfr
