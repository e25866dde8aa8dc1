#include "drfr/pca.hpp"

#include <algorithm>
#include <cmath>

namespace drfr {
namespace {

struct Spectrum {
    Vector values;   // descending
    Matrix vectors;  // matching columns
};

Spectrum covariance_spectrum(const Dataset& dataset) {
    const Matrix xs = dataset.feature_matrix();
    const Vector mean = xs.rowwise().mean();
    const Matrix centred = xs.colwise() - mean;
    const Matrix cov = centred * centred.transpose() / static_cast<double>(xs.cols() - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("covariance eigendecomposition failed");
    return {eig.eigenvalues().reverse(), eig.eigenvectors().rowwise().reverse()};
}

std::size_t rank_of(const Vector& descending) {
    if (descending.size() == 0 || descending(0) <= 0.0) return 0;
    const double tol = descending(0) * static_cast<double>(descending.size()) * 1e-12;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < descending.size(); ++i) {
        if (descending(i) > tol) ++r;
    }
    return r;
}

void check_inputs(const Dataset& dataset) {
    require_valid(dataset);
    if (dataset.size() < 2) throw InvalidArgument("PCA needs at least two samples");
}

}  // namespace

std::size_t centred_rank(const Dataset& dataset) {
    check_inputs(dataset);
    return rank_of(covariance_spectrum(dataset).values);
}

EmbeddingModel pca_fit(const Dataset& dataset, std::size_t out_dim) {
    check_inputs(dataset);
    if (out_dim == 0) throw InvalidArgument("out_dim must be positive");
    if (out_dim > std::min(dataset.dim, dataset.size())) {
        throw InvalidArgument("out_dim exceeds min(dimension, sample count)");
    }
    const auto spectrum = covariance_spectrum(dataset);
    const std::size_t rank = rank_of(spectrum.values);
    if (out_dim > rank) throw RankDeficient(out_dim, rank);

    Matrix w = spectrum.vectors.leftCols(static_cast<Eigen::Index>(out_dim)).transpose();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            if (std::abs(w(r, c)) > 1e-12) {
                if (w(r, c) < 0.0) w.row(r) *= -1.0;
                break;
            }
        }
    }
    return EmbeddingModel(EmbeddingKind::PCA, std::move(w));
}

}  // namespace drfr
