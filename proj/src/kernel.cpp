#include "subspace/kernel.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace subspace {

namespace {

// Eigenvalues this far below lambda_max (relatively) are round-off from
// rank-deficient Gram matrices; the square root would inflate their noise
// from 1e-14 to 1e-7, so they are treated as exact zeros.
constexpr double kEigenClipRel = 1e-12;

struct SqrtReport {
    double trace_sqrt;
    double max_eigenvalue;
};

SqrtReport sqrt_spectrum(const Matrix &sym, const char *what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const Vector lambda = eig.eigenvalues();
    const double psd_tol = tolerances().psd;
    const double lmax = std::max(0.0, lambda(lambda.size() - 1));
    double trace = 0.0;
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -psd_tol) {
            throw NotPSD(std::string(what) + ": eigenvalue " + std::to_string(lambda(i)) +
                         " below the PSD tolerance");
        }
        if (lambda(i) > kEigenClipRel * lmax) {
            trace += std::sqrt(lambda(i));
        }
    }
    return {trace, lmax};
}

} // namespace

GramMatrix GramMatrix::from_embeddings(const Matrix &x) {
    if (!x.allFinite()) {
        throw InvalidMatrix("gram_from_embeddings: non-finite input");
    }
    Matrix k = x.transpose() * x;
    k = 0.5 * (k + k.transpose());
    return GramMatrix(std::move(k));
}

GramMatrix GramMatrix::from_matrix(Matrix k) {
    if (!k.allFinite()) {
        throw InvalidMatrix("GramMatrix: non-finite input");
    }
    if (k.rows() != k.cols()) {
        throw DimensionError("GramMatrix: must be square, got " + std::to_string(k.rows()) +
                             "x" + std::to_string(k.cols()));
    }
    const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
    if (asym > tolerances().abs) {
        throw InvalidMatrix("GramMatrix: not symmetric (deviation " + std::to_string(asym) +
                            ")");
    }
    k = 0.5 * (k + k.transpose());
    sqrt_spectrum(k, "GramMatrix"); // PSD validation
    return GramMatrix(std::move(k));
}

bool GramMatrix::unit_diagonal(double tol) const {
    for (Index i = 0; i < k_.rows(); ++i) {
        if (std::abs(k_(i, i) - 1.0) > tol) {
            return false;
        }
    }
    return true;
}

double kernel_loss(const GramMatrix &k, const LabelMatrix &y, double alpha, double beta) {
    if (y.sample_count() != k.size()) {
        throw DimensionError("kernel_loss: Y has " + std::to_string(y.sample_count()) +
                             " columns but K is " + std::to_string(k.size()) + "x" +
                             std::to_string(k.size()));
    }
    const Matrix yty = y.matrix().transpose() * y.matrix();
    const SqrtReport joint = sqrt_spectrum(yty + k.matrix(), "kernel_loss(Y^T Y + K)");
    const SqrtReport self = sqrt_spectrum(k.matrix(), "kernel_loss(K)");
    return joint.trace_sqrt - alpha * self.trace_sqrt + beta * self.max_eigenvalue;
}

double kernel_posterior(double k_vx) {
    if (!std::isfinite(k_vx) || std::abs(k_vx) > 1.0 + 1e-6) {
        throw NormalizationError("kernel_posterior: |k(v,x)| = " + std::to_string(k_vx) +
                                 " exceeds 1; features must be unit norm");
    }
    return std::clamp(k_vx * k_vx, 0.0, 1.0);
}

} // namespace subspace
