#pragma once

#include "subspace/loss.hpp"
#include "subspace/spectral.hpp"

#include <cstdint>
#include <vector>

namespace subspace {

/// Root of sum_i t / sqrt(mu_i^2 + t^2) = alpha*c - 2*beta*t on
/// (0, alpha*c/(2*beta)], found by bisection to |residual| < 1e-12.
/// The residual is strictly increasing so the root is unique. Requires
/// mu_i > 0 (InvalidSpectrum), mu.size() == c (DimensionError) and
/// alpha in (0,1), beta in (0,1) (InvalidAlpha / ConfigError). When alpha
/// falls below alpha_lower_bound the equation is still well posed; a
/// warning is printed and the root returned, outside the optimality
/// guarantee.
double solve_t_star(const std::vector<double> &mu, Index c, double alpha, double beta);

/// Root of sum_i t / sqrt(mu_i^2 + t^2) = c - beta for the plain spectral
/// penalty, same bisection contract. beta in (0,1).
double solve_t_star_spectral(const std::vector<double> &mu, Index c, double beta);

/// sqrt(max{0, 1 - 4 beta^2 mu_c^2 / c^2}): the smallest alpha for which
/// the closed-form optimality certificate holds.
double alpha_lower_bound(double mu_c, Index c, double beta);

/// Analytic minimizer of a loss row: X* = U diag(scales) Vy^T where U is a
/// seeded random Stiefel frame and Vy holds the right singular vectors of Y.
/// For the t* variants all scales equal t*; for NoPenalty
/// scales_i = alpha/sqrt(1-alpha^2) * mu_i.
struct MinimizerSpec {
    std::vector<double> scales; ///< c nonzero singular values of X*
    StiefelFrame u;             ///< d x c
    StiefelFrame vy;            ///< n x c
    LossVariant variant;

    double t_star() const { return scales.front(); }
    Matrix materialize() const;
};

/// Builds the minimizer for the given label matrix. Requires d >= c
/// (DimensionError) and rank(Y) = c (RankError).
MinimizerSpec minimizer(const LabelMatrix &y, Index d, const LossConfig &cfg,
                        std::uint64_t u_seed);

/// Minimum of ||[Sigma_Y Vy^T; Sigma_X Vx^T]||_* over Stiefel Vx, attained
/// at Vx = Vy:
///   c = d:  sum_i sqrt(mu_i^2 + sigma_i^2)
///   d < c:  the first d coupled terms plus the trailing mu_i
///   d > c:  the first c coupled terms plus the trailing sigma_i
/// Both lists must be sorted descending and non-negative.
double stacked_min_value(const std::vector<double> &mu, const std::vector<double> &sigma,
                         Index c, Index d);

} // namespace subspace
