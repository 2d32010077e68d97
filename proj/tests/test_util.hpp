#pragma once

#include "subspace/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace subspace::testing {

inline double max_abs_diff(const Matrix &a, const Matrix &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Independent nuclear-norm route: sum of the square roots of the Gram
/// eigenvalues from a symmetric eigensolver. Never touches svd(). The Gram
/// is taken on the smaller side so no structural zero eigenvalue picks up
/// round-off that the square root would inflate.
inline double nuclear_norm_via_eigensolver(const Matrix &m) {
    const Matrix gram =
        m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    double sum = 0.0;
    for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
        sum += std::sqrt(std::max(0.0, eig.eigenvalues()(i)));
    }
    return sum;
}

/// Random orthogonal d x d matrix (thin QR of a Gaussian).
inline Matrix random_orthogonal(Index d, std::uint64_t seed) {
    return random_stiefel(d, d, seed).matrix();
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
    return gaussian_matrix(rows, cols, seed);
}

/// Matrix with unit l2-norm columns.
inline Matrix random_unit_columns(Index rows, Index cols, std::uint64_t seed) {
    Matrix m = gaussian_matrix(rows, cols, seed);
    for (Index j = 0; j < cols; ++j) {
        m.col(j) /= m.col(j).norm();
    }
    return m;
}

} // namespace subspace::testing
