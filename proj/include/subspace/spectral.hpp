#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace subspace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin SVD record m = left * diag(singular_values) * right^T with
/// singular values sorted descending. Columns of `left`/`right` are
/// orthonormal and sign-fixed so the first nonzero entry of each left
/// singular vector is non-negative.
struct SvdFactors {
    Matrix left;
    Vector singular_values;
    Matrix right;
};

/// A matrix with orthonormal columns (a point on St_d(R^n)).
class StiefelFrame {
  public:
    /// Validates frame^T * frame = I within tolerance.
    explicit StiefelFrame(Matrix frame);

    const Matrix &matrix() const { return frame_; }
    Index rows() const { return frame_.rows(); }
    Index cols() const { return frame_.cols(); }

  private:
    Matrix frame_;
};

/// Thin SVD with the deterministic sign convention above.
/// Throws InvalidMatrix on non-finite input.
SvdFactors svd(const Matrix &m);

/// Singular values only (descending); cheaper than svd() when the
/// factors are not needed.
Vector singular_values(const Matrix &m);

/// Sum of singular values, Tr((m^T m)^{1/2}).
double nuclear_norm(const Matrix &m);

/// Largest singular value (operator 2-norm).
double spectral_norm(const Matrix &m);

/// Number of singular values above rank_rel * sigma_1. Input must be
/// sorted descending.
Index numerical_rank(const Vector &sv);

/// Seeded i.i.d. N(0, scale^2) matrix, filled row by row so the stream
/// order is part of the contract.
Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0);

/// Orthonormal n x d frame from the QR factorization of a seeded Gaussian
/// matrix, with the R-diagonal sign fix that makes the result unique.
/// Throws DimensionError if n < d.
StiefelFrame random_stiefel(Index n, Index d, std::uint64_t seed);

/// Singular values of the stacked frame [vy^T; vx^T], computed through the
/// c x c overlap vy^T * vx as the union over i of
/// {sqrt(1 + s_i), sqrt(1 - s_i)} for s_i = sigma_i(vy^T vx).
/// Returns 2c values sorted descending.
std::vector<double> stacked_stiefel_spectrum(const StiefelFrame &vy, const StiefelFrame &vx);

/// Eigenvalues of [[0, m^T], [m, 0]] for square m: the union over i of
/// {-sigma_i, +sigma_i}. Returned ascending, matching the eigensolver
/// convention. Throws DimensionError for non-square input.
std::vector<double> offdiag_block_spectrum(const Matrix &m);

} // namespace subspace
