#include "subspace/closed_form.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace subspace {

namespace {

constexpr int kMaxBisectionIters = 200;

void check_spectrum(const std::vector<double> &mu, Index c) {
    if (static_cast<Index>(mu.size()) != c || c < 1) {
        throw DimensionError("t* equation: expected " + std::to_string(c) +
                             " singular values, got " + std::to_string(mu.size()));
    }
    for (double m : mu) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw InvalidSpectrum("t* equation: singular values must be positive and finite");
        }
    }
}

// Bisection for a strictly increasing residual with r(lo) < 0 < r(hi).
template <class F>
double bisect(F residual, double lo, double hi) {
    const double tol = tolerances().root_residual;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxBisectionIters; ++it) {
        mid = 0.5 * (lo + hi);
        const double r = residual(mid);
        if (std::abs(r) < tol) {
            return mid;
        }
        if (r < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

} // namespace

double solve_t_star(const std::vector<double> &mu, Index c, double alpha, double beta) {
    check_spectrum(mu, c);
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw InvalidAlpha("solve_t_star: alpha must be in (0,1), got " +
                           std::to_string(alpha));
    }
    if (!(beta > 0.0) || !(beta < 1.0)) {
        throw ConfigError("solve_t_star: beta must be in (0,1), got " + std::to_string(beta));
    }
    const double bound = alpha_lower_bound(mu.back(), c, beta);
    if (alpha < bound) {
        std::cerr << "warning: alpha=" << alpha << " below the optimality bound " << bound
                  << "; solving the scalar equation anyway\n";
    }
    const double cd = static_cast<double>(c);
    auto residual = [&](double t) {
        double lhs = 0.0;
        for (double m : mu) {
            lhs += t / std::sqrt(m * m + t * t);
        }
        return lhs - alpha * cd + 2.0 * beta * t;
    };
    // r(0) = -alpha*c < 0 and r(alpha*c/(2*beta)) > 0, so the proven bracket
    // always contains the root.
    return bisect(residual, 0.0, alpha * cd / (2.0 * beta));
}

double solve_t_star_spectral(const std::vector<double> &mu, Index c, double beta) {
    check_spectrum(mu, c);
    if (!(beta > 0.0) || !(beta < 1.0)) {
        throw ConfigError("solve_t_star_spectral: beta must be in (0,1), got " +
                          std::to_string(beta));
    }
    const double target = static_cast<double>(c) - beta;
    auto residual = [&](double t) {
        double lhs = 0.0;
        for (double m : mu) {
            lhs += t / std::sqrt(m * m + t * t);
        }
        return lhs - target;
    };
    double hi = *std::max_element(mu.begin(), mu.end());
    while (residual(hi) <= 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw InvalidSpectrum("solve_t_star_spectral: bracket expansion diverged");
        }
    }
    return bisect(residual, 0.0, hi);
}

double alpha_lower_bound(double mu_c, Index c, double beta) {
    if (!(mu_c > 0.0)) {
        throw InvalidSpectrum("alpha_lower_bound: mu_c must be positive");
    }
    const double cd = static_cast<double>(c);
    return std::sqrt(std::max(0.0, 1.0 - 4.0 * beta * beta * mu_c * mu_c / (cd * cd)));
}

Matrix MinimizerSpec::materialize() const {
    Vector s(static_cast<Index>(scales.size()));
    for (std::size_t i = 0; i < scales.size(); ++i) {
        s(static_cast<Index>(i)) = scales[i];
    }
    return u.matrix() * s.asDiagonal() * vy.matrix().transpose();
}

MinimizerSpec minimizer(const LabelMatrix &y, Index d, const LossConfig &cfg,
                        std::uint64_t u_seed) {
    cfg.validate();
    const Index c = y.label_count();
    if (d < c) {
        throw DimensionError("minimizer: need d >= c = " + std::to_string(c) + ", got d = " +
                             std::to_string(d));
    }
    const SvdFactors fy = svd(y.matrix());
    if (numerical_rank(fy.singular_values) < c) {
        throw RankError("minimizer: label matrix is rank-deficient (rank " +
                        std::to_string(numerical_rank(fy.singular_values)) + " < " +
                        std::to_string(c) + "); the closed form is undefined");
    }
    std::vector<double> mu(fy.singular_values.data(), fy.singular_values.data() + c);

    std::vector<double> scales(mu.size());
    switch (cfg.variant) {
    case LossVariant::SquaredSpectralPenalty: {
        const double t = solve_t_star(mu, c, cfg.alpha, cfg.beta);
        std::fill(scales.begin(), scales.end(), t);
        break;
    }
    case LossVariant::SpectralPenalty: {
        // The solution family allows any Sigma <= t* I on the trailing
        // directions; Sigma = 0 is the canonical lowest-rank member.
        const double t = solve_t_star_spectral(mu, c, cfg.beta);
        std::fill(scales.begin(), scales.end(), t);
        break;
    }
    case LossVariant::NoPenalty: {
        const double factor = cfg.alpha / std::sqrt(1.0 - cfg.alpha * cfg.alpha);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            scales[i] = factor * mu[i];
        }
        break;
    }
    }

    StiefelFrame u = random_stiefel(d, c, u_seed);
    StiefelFrame vy(fy.right.leftCols(c));
    return MinimizerSpec{std::move(scales), std::move(u), std::move(vy), cfg.variant};
}

double stacked_min_value(const std::vector<double> &mu, const std::vector<double> &sigma,
                         Index c, Index d) {
    if (static_cast<Index>(mu.size()) != c || static_cast<Index>(sigma.size()) != d) {
        throw DimensionError("stacked_min_value: list lengths must match c and d");
    }
    auto check_sorted = [](const std::vector<double> &v, const char *name) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0.0 || (i > 0 && v[i] > v[i - 1])) {
                throw InvalidSpectrum(std::string("stacked_min_value: ") + name +
                                      " must be sorted descending and non-negative");
            }
        }
    };
    check_sorted(mu, "mu");
    check_sorted(sigma, "sigma");

    const Index k = std::min(c, d);
    double v = 0.0;
    for (Index i = 0; i < k; ++i) {
        v += std::sqrt(mu[i] * mu[i] + sigma[i] * sigma[i]);
    }
    for (Index i = k; i < c; ++i) {
        v += mu[i];
    }
    for (Index i = k; i < d; ++i) {
        v += sigma[i];
    }
    return v;
}

} // namespace subspace
