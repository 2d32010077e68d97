#pragma once

#include "subspace/loss.hpp"
#include "subspace/spectral.hpp"

namespace subspace {

/// n x n symmetric positive semidefinite matrix of pairwise inner products.
/// Eigenvalues in [-1e-8, 0) are treated as round-off; anything more
/// negative is rejected with NotPSD.
class GramMatrix {
  public:
    /// K = X^T X, symmetrized against round-off.
    static GramMatrix from_embeddings(const Matrix &x);

    /// Validates symmetry and positive semidefiniteness of an externally
    /// supplied kernel matrix (e.g. read from CSV).
    static GramMatrix from_matrix(Matrix k);

    const Matrix &matrix() const { return k_; }
    Index size() const { return k_.rows(); }

    /// True when every diagonal entry is 1 within tol (required for the
    /// posterior interpretation k(v,x)^2).
    bool unit_diagonal(double tol = 1e-8) const;

  private:
    explicit GramMatrix(Matrix k) : k_(std::move(k)) {}
    Matrix k_;
};

inline GramMatrix gram_from_embeddings(const Matrix &x) {
    return GramMatrix::from_embeddings(x);
}

/// Gram-matrix form of the squared-spectral-penalty loss:
///   Tr((Y^T Y + K)^{1/2}) - alpha Tr(K^{1/2}) + beta ||K||_2.
/// Matrix square roots take the non-negative roots of the eigenvalues;
/// equals joint_loss(X, Y, squared) when K = X^T X.
double kernel_loss(const GramMatrix &k, const LabelMatrix &y, double alpha, double beta);

/// Posterior of a minterm from a single kernel evaluation against its
/// representative: k(v,x)^2, clamped to [0,1]. Requires |k_vx| <= 1 + 1e-6
/// (unit-norm features), else NormalizationError.
double kernel_posterior(double k_vx);

} // namespace subspace
