#pragma once

#include "subspace/spectral.hpp"

#include <string>

namespace subspace {

/// The three rows of the loss family:
///   NoPenalty:              ||Z||_* - alpha ||X||_*
///   SpectralPenalty:        ||Z||_* -       ||X||_* + beta ||X||_2
///   SquaredSpectralPenalty: ||Z||_* - alpha ||X||_* + beta ||X||_2^2
/// with Z = [Y; X] stacked.
enum class LossVariant { NoPenalty, SpectralPenalty, SquaredSpectralPenalty };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string &name);

struct LossConfig {
    double alpha = 0.99;
    double beta = 0.7;
    LossVariant variant = LossVariant::SquaredSpectralPenalty;

    /// Throws InvalidAlpha / ConfigError when the (alpha, beta) pair is
    /// outside the variant's domain. SpectralPenalty requires alpha = 1,
    /// the other variants alpha in (0,1); penalty variants need beta in (0,1).
    void validate() const;

    static LossConfig squared(double alpha, double beta) {
        return {alpha, beta, LossVariant::SquaredSpectralPenalty};
    }
    static LossConfig spectral(double beta) {
        return {1.0, beta, LossVariant::SpectralPenalty};
    }
    static LossConfig no_penalty(double alpha) {
        return {alpha, 0.0, LossVariant::NoPenalty};
    }
};

/// Binary c x n label matrix Y; one column per sample, one row per literal.
class LabelMatrix {
  public:
    /// Validates that every entry is 0 or 1 (within 1e-9, then snapped).
    explicit LabelMatrix(Matrix y);

    const Matrix &matrix() const { return y_; }
    Index label_count() const { return y_.rows(); }
    Index sample_count() const { return y_.cols(); }

    /// Columns restricted to `indices`, in the given order.
    LabelMatrix columns(const std::vector<int> &indices) const;

  private:
    Matrix y_;
};

/// Loss value for the given variant; x is d x n, y is c x n.
double joint_loss(const Matrix &x, const LabelMatrix &y, const LossConfig &cfg);

/// U V^T from the thin SVD of x restricted to singular values above the
/// rank threshold; the minimum-norm element of the nuclear-norm
/// subdifferential. Zero matrix for (numerically) zero x.
Matrix nuclear_subgradient(const Matrix &x);

/// Subgradient of joint_loss in x: the bottom d rows of the stacked
/// subgradient, minus alpha times the nuclear term, plus the spectral
/// penalty term. At a repeated top singular value the spectral term is
/// spread uniformly over the tied group, which is the rotation-invariant
/// subdifferential element and the one that vanishes at the closed-form
/// minimizers.
Matrix loss_subgradient(const Matrix &x, const LabelMatrix &y, const LossConfig &cfg);

enum class BaselineKind { OLE, MMCR };

BaselineKind baseline_from_string(const std::string &name);

/// Simplified synthetic-scale baseline objectives. Classes are the label
/// rows: class l collects the samples with y(l, j) = 1, so multi-label
/// samples belong to several classes. These are qualitative stand-ins, not
/// reimplementations of the published training pipelines.
///   MMCR: negative nuclear norm of the matrix of per-class centroids of
///         the l2-normalized embeddings.
///   OLE:  sum_l max(delta, ||X_l||_*) - ||X||_* with floor delta = 1.
double baseline_loss(const Matrix &x, const LabelMatrix &y, BaselineKind kind);

/// Subgradient of baseline_loss in x (used to train the baselines for the
/// Gram-matrix comparisons).
Matrix baseline_subgradient(const Matrix &x, const LabelMatrix &y, BaselineKind kind);

/// Nuclear-norm floor used by the OLE baseline to avoid collapse.
inline constexpr double kOleFloor = 1.0;

struct CovarianceRegObjective {
    double value;             ///< sum_i sqrt((X X^T)_ii), the per-coordinate std devs
    double offdiag_violation; ///< max_{i != j} |(X X^T)_ij|
};

/// The covariance-regularization form of the nuclear norm: when the
/// off-diagonal violation is zero, `value` equals nuclear_norm(x).
CovarianceRegObjective covariance_reg_objective(const Matrix &x);

} // namespace subspace
