#include "verify_suite.hpp"

#include "subspace/closed_form.hpp"
#include "subspace/descent.hpp"
#include "subspace/kernel.hpp"
#include "subspace/lattice.hpp"
#include "subspace/loss.hpp"
#include "subspace/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace subspace::verify {

namespace {

std::string format_violation(const std::string &what, double value, double bound) {
    std::ostringstream os;
    os << what << ": " << value << " exceeds " << bound;
    return os.str();
}

CheckResult fail(const std::string &detail) { return {false, detail}; }
CheckResult pass() { return {}; }

Matrix random_orthogonal(Index d, std::uint64_t seed) {
    return random_stiefel(d, d, seed).matrix();
}

LabelMatrix disjoint_classes(Index classes, Index per_class) {
    Matrix y = Matrix::Zero(classes, classes * per_class);
    for (Index c = 0; c < classes; ++c) {
        for (Index s = 0; s < per_class; ++s) {
            y(c, c * per_class + s) = 1.0;
        }
    }
    return LabelMatrix(y);
}

CheckResult nuclear_invariance(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const Matrix m = gaussian_matrix(4, 7, s);
        const double base = nuclear_norm(m);
        const double rotated =
            nuclear_norm(random_orthogonal(4, s + 1) * m * random_orthogonal(7, s + 2));
        if (std::abs(rotated - base) > 1e-10) {
            return fail(format_violation("| |U1 m U2|_* - |m|_* |", std::abs(rotated - base),
                                         1e-10));
        }
    }
    return pass();
}

CheckResult nuclear_triangle(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const Matrix a = gaussian_matrix(5, 6, s);
        const Matrix b = gaussian_matrix(5, 6, s + 7919);
        if (nuclear_norm(a + b) > nuclear_norm(a) + nuclear_norm(b) + 1e-10) {
            return fail("triangle inequality violated");
        }
    }
    return pass();
}

CheckResult norm_bounds(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const Matrix m = gaussian_matrix(4, 9, seed + static_cast<std::uint64_t>(t));
        const double nn = nuclear_norm(m);
        const double sn = spectral_norm(m);
        if (sn > nn + 1e-12 || nn > 4.0 * sn + 1e-10) {
            return fail("spectral/nuclear sandwich violated");
        }
    }
    return pass();
}

CheckResult unit_column_max(std::uint64_t seed, int trials) {
    const Index d = 4, n = 12;
    const double bound = d * std::sqrt(static_cast<double>(n) / d);
    for (int t = 0; t < trials; ++t) {
        Matrix m = gaussian_matrix(d, n, seed + static_cast<std::uint64_t>(t));
        for (Index j = 0; j < n; ++j) {
            m.col(j).normalize();
        }
        if (nuclear_norm(m) > bound + 1e-10) {
            return fail(format_violation("unit-column nuclear norm", nuclear_norm(m), bound));
        }
    }
    Matrix maximizer(d, n);
    const Matrix u = random_orthogonal(d, seed);
    for (Index k = 0; k < n / d; ++k) {
        maximizer.middleCols(k * d, d) = u;
    }
    if (std::abs(nuclear_norm(maximizer) - bound) > 1e-10) {
        return fail("constructed maximizer does not attain d*sqrt(n/d)");
    }
    return pass();
}

CheckResult stacked_spectrum(std::uint64_t seed, int trials) {
    const Index n = 10, c = 3;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const StiefelFrame vy = random_stiefel(n, c, s);
        const StiefelFrame vx = t % 8 == 0 ? vy : random_stiefel(n, c, s + 31);
        const auto predicted = stacked_stiefel_spectrum(vy, vx);
        Matrix stacked(2 * c, n);
        stacked.topRows(c) = vy.matrix().transpose();
        stacked.bottomRows(c) = vx.matrix().transpose();
        const Vector direct = singular_values(stacked);
        for (Index i = 0; i < direct.size(); ++i) {
            if (std::abs(predicted[static_cast<std::size_t>(i)] - direct(i)) > 1e-10) {
                return fail("sqrt(1 +- sigma_i) values disagree with the direct SVD");
            }
        }
        double sum = 0.0;
        for (double v : predicted) {
            sum += v;
        }
        if (sum < std::sqrt(2.0) * c - 1e-10) {
            return fail("stacked nuclear norm fell below sqrt(2) c");
        }
    }
    const StiefelFrame vy = random_stiefel(n, c, seed + 1);
    double at_min = 0.0;
    for (double v : stacked_stiefel_spectrum(vy, vy)) {
        at_min += v;
    }
    if (std::abs(at_min - std::sqrt(2.0) * c) > 1e-10) {
        return fail("minimum sqrt(2) c not attained at vx = vy");
    }
    return pass();
}

CheckResult offdiag_spectrum(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const Matrix m = gaussian_matrix(3, 3, seed + static_cast<std::uint64_t>(t));
        const auto predicted = offdiag_block_spectrum(m);
        Matrix block = Matrix::Zero(6, 6);
        block.topRightCorner(3, 3) = m.transpose();
        block.bottomLeftCorner(3, 3) = m;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
        for (Index i = 0; i < 6; ++i) {
            if (std::abs(predicted[static_cast<std::size_t>(i)] - eig.eigenvalues()(i)) >
                1e-10) {
                return fail("{-sigma, +sigma} disagrees with the block eigensolver");
            }
        }
    }
    return pass();
}

CheckResult stacked_min(std::uint64_t seed, int trials) {
    const Index n = 6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.2, 2.0);
    std::vector<double> mu{unif(rng), unif(rng)};
    std::vector<double> sigma{unif(rng), unif(rng)};
    std::sort(mu.begin(), mu.end(), std::greater<double>());
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    const double predicted = stacked_min_value(mu, sigma, 2, 2);

    const StiefelFrame vy = random_stiefel(n, 2, seed);
    auto stacked_norm = [&](const StiefelFrame &vx) {
        Matrix z(4, n);
        z.row(0) = mu[0] * vy.matrix().col(0).transpose();
        z.row(1) = mu[1] * vy.matrix().col(1).transpose();
        z.row(2) = sigma[0] * vx.matrix().col(0).transpose();
        z.row(3) = sigma[1] * vx.matrix().col(1).transpose();
        return nuclear_norm(z);
    };
    if (std::abs(stacked_norm(vy) - predicted) > 1e-10) {
        return fail("minimum not attained at vx = vy");
    }
    for (int t = 0; t < trials; ++t) {
        if (predicted > stacked_norm(random_stiefel(n, 2, seed + 100 + t)) + 1e-10) {
            return fail("a random Stiefel frame beat the predicted minimum");
        }
    }
    return pass();
}

CheckResult tstar_equation(std::uint64_t seed, int trials) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const Index c = 1 + static_cast<Index>(rng() % 5);
        std::vector<double> mu(static_cast<std::size_t>(c));
        for (auto &m : mu) {
            m = 0.1 + 4.0 * unif(rng);
        }
        std::sort(mu.begin(), mu.end(), std::greater<double>());
        const double beta = 0.05 + 0.9 * unif(rng);
        const double lower = alpha_lower_bound(mu.back(), c, beta);
        const double alpha = lower + (1.0 - lower) * (0.05 + 0.9 * unif(rng));
        const double root = solve_t_star(mu, c, alpha, beta);
        double lhs = 0.0;
        for (double m : mu) {
            lhs += root / std::sqrt(m * m + root * root);
        }
        const double residual = std::abs(lhs - alpha * static_cast<double>(c) + 2 * beta * root);
        if (residual >= 1e-12) {
            return fail(format_violation("t* residual", residual, 1e-12));
        }
        if (!(root > 0.0) || root > alpha * static_cast<double>(c) / (2 * beta) + 1e-15) {
            return fail("t* escaped the proven bound (0, alpha c / 2 beta]");
        }
    }
    return pass();
}

CheckResult minimizer_family(std::uint64_t seed, int trials) {
    const LabelMatrix y = disjoint_classes(3, 3);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    const Matrix base_x = minimizer(y, 4, cfg, seed).materialize();
    const double base = joint_loss(base_x, y, cfg);
    for (int t = 1; t <= std::min(trials, 16); ++t) {
        const double other =
            joint_loss(minimizer(y, 4, cfg, seed + static_cast<std::uint64_t>(t)).materialize(),
                       y, cfg);
        if (std::abs(other - base) > 1e-10) {
            return fail("minimizer family members disagree on the loss value");
        }
    }
    for (int t = 0; t < trials; ++t) {
        Matrix h = gaussian_matrix(4, 9, seed + 1000 + static_cast<std::uint64_t>(t));
        h /= h.norm();
        const double eps = t % 2 == 0 ? 1e-2 : 1e-3;
        if (joint_loss(base_x + eps * h, y, cfg) < base - 1e-12) {
            return fail("a random perturbation went below the closed-form minimum");
        }
    }
    return pass();
}

CheckResult minterm_orthogonality(std::uint64_t seed, int trials) {
    for (int t = 0; t < std::min(trials, 24); ++t) {
        const Index classes = 2 + (t % 4);
        const LabelMatrix y = disjoint_classes(classes, 3);
        const Matrix x =
            minimizer(y, classes + 1, LossConfig::squared(0.99, 0.7),
                      seed + static_cast<std::uint64_t>(t))
                .materialize();
        for (Index i = 0; i < y.sample_count(); ++i) {
            for (Index j = i + 1; j < y.sample_count(); ++j) {
                if (y.matrix().col(i) != y.matrix().col(j) &&
                    std::abs(x.col(i).dot(x.col(j))) >= 1e-8) {
                    return fail("distinct minterms embedded non-orthogonally");
                }
            }
        }
    }
    return pass();
}

CheckResult subgradient_norm(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const Matrix x = gaussian_matrix(3 + t % 3, 6, seed + static_cast<std::uint64_t>(t));
        if (spectral_norm(nuclear_subgradient(x)) > 1.0 + 1e-10) {
            return fail("nuclear subgradient left the unit spectral ball");
        }
    }
    return pass();
}

CheckResult subgradient_fd(std::uint64_t seed, int trials) {
    const Matrix x = gaussian_matrix(4, 6, seed);
    const Matrix g = nuclear_subgradient(x);
    const double eps = 1e-6;
    for (int t = 0; t < trials; ++t) {
        Matrix h = gaussian_matrix(4, 6, seed + 1 + static_cast<std::uint64_t>(t));
        h /= h.norm();
        const double fd = (nuclear_norm(x + eps * h) - nuclear_norm(x - eps * h)) / (2 * eps);
        const double predicted = (g.array() * h.array()).sum();
        if (std::abs(fd - predicted) > 1e-5) {
            return fail(format_violation("directional-derivative gap", std::abs(fd - predicted),
                                         1e-5));
        }
    }
    return pass();
}

CheckResult loss_gauge(std::uint64_t seed, int trials) {
    const LabelMatrix y = disjoint_classes(3, 3);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const Matrix x = gaussian_matrix(4, 9, s);
        const double base = joint_loss(x, y, cfg);
        if (std::abs(joint_loss(random_orthogonal(4, s + 17) * x, y, cfg) - base) > 1e-10) {
            return fail("loss not invariant under rotations of the embedding space");
        }
        std::vector<int> perm(9);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix xp(4, 9), yp(3, 9);
        for (int j = 0; j < 9; ++j) {
            xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
            yp.col(j) = y.matrix().col(perm[static_cast<std::size_t>(j)]);
        }
        if (std::abs(joint_loss(xp, LabelMatrix(yp), cfg) - base) > 1e-10) {
            return fail("loss not invariant under simultaneous column permutation");
        }
    }
    return pass();
}

CheckResult covariance_reg(std::uint64_t seed, int trials) {
    for (int t = 0; t < trials; ++t) {
        const Matrix x = gaussian_matrix(4, 9, seed + static_cast<std::uint64_t>(t));
        const SvdFactors f = svd(x);
        const auto rotated = covariance_reg_objective(f.left.transpose() * x);
        if (rotated.offdiag_violation > 1e-10 ||
            std::abs(rotated.value - nuclear_norm(x)) > 1e-10) {
            return fail("diagonal-covariance objective does not match the nuclear norm");
        }
        if (covariance_reg_objective(x).value < nuclear_norm(x) - 1e-10) {
            return fail("per-coordinate std-dev sum fell below the nuclear norm");
        }
    }
    return pass();
}

CheckResult lattice_laws(std::uint64_t seed, int trials) {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const Index d = 3 + static_cast<Index>(rng() % 8); // d <= 10
        const Index m = 2 + static_cast<Index>(rng() % (d - 1)); // 2 <= m <= d
        const MintermBasis basis =
            MintermBasis::from_columns(random_stiefel(d, std::max(m, Index{2}), s).matrix());

        auto random_subset = [&]() {
            std::vector<int> out;
            for (int i = 0; i < basis.size(); ++i) {
                if (rng() % 2 == 0) {
                    out.push_back(i);
                }
            }
            return out;
        };
        const ProjectionOperator p = projection_operator(random_subset(), basis);
        const ProjectionOperator q = projection_operator(random_subset(), basis);
        const ProjectionOperator r = projection_operator(random_subset(), basis);

        const auto pq = lattice_ops(p, q);
        if ((pq.meet.matrix() - pq.meet.matrix().transpose()).cwiseAbs().maxCoeff() > 1e-10 ||
            (pq.meet.matrix() * pq.meet.matrix() - pq.meet.matrix()).cwiseAbs().maxCoeff() >
                1e-8) {
            return fail("meet is not a symmetric idempotent");
        }
        const ProjectionOperator not_join = lattice_ops(pq.join, pq.join).complement_p;
        const ProjectionOperator not_p = lattice_ops(p, p).complement_p;
        const ProjectionOperator not_q = lattice_ops(q, q).complement_p;
        if ((not_join.matrix() - lattice_ops(not_p, not_q).meet.matrix())
                .cwiseAbs()
                .maxCoeff() > 1e-8) {
            return fail("De Morgan's law failed");
        }
        const Matrix lhs = lattice_ops(p, lattice_ops(q, r).join).meet.matrix();
        const Matrix rhs =
            lattice_ops(lattice_ops(p, q).meet, lattice_ops(p, r).meet).join.matrix();
        if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-8) {
            return fail("distributivity failed");
        }
        // order characterization: J_p subset J_q <=> P_p P_q = P_p
        const ProjectionOperator sub = projection_operator(pq.meet.minterm_set(), basis);
        if ((sub.matrix() * q.matrix() - sub.matrix()).cwiseAbs().maxCoeff() > 1e-8) {
            return fail("order characterization P_p = P_p P_q failed");
        }
    }
    return pass();
}

CheckResult posterior_normalization(std::uint64_t seed, int trials) {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
        const Index d = 3 + static_cast<Index>(rng() % 8);
        const Index m = 2 + static_cast<Index>(rng() % (d - 1));
        const MintermBasis basis = MintermBasis::from_columns(random_stiefel(d, m, s).matrix());
        Vector coeffs = gaussian_matrix(m, 1, s + 5).col(0);
        coeffs.normalize();
        const Vector x = basis.vectors() * coeffs;

        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            total += posterior(x, projection_operator({i}, basis));
        }
        if (std::abs(total - 1.0) > 1e-8) {
            return fail("minterm posteriors do not sum to one");
        }

        std::vector<int> j;
        for (int i = 0; i < m; ++i) {
            if (rng() % 2 == 0) {
                j.push_back(i);
            }
        }
        double singles = 0.0;
        for (int i : j) {
            singles += posterior_raw(x, projection_operator({i}, basis));
        }
        if (std::abs(posterior_raw(x, projection_operator(j, basis)) - singles) > 1e-10) {
            return fail("posterior additivity over disjoint minterms failed");
        }
    }
    return pass();
}

CheckResult kernel_consistency(std::uint64_t seed, int trials) {
    const LabelMatrix y = disjoint_classes(3, 4);
    for (int t = 0; t < trials; ++t) {
        const Matrix x = gaussian_matrix(4, 12, seed + static_cast<std::uint64_t>(t));
        const double via_kernel = kernel_loss(gram_from_embeddings(x), y, 0.99, 0.7);
        const double via_vectors = joint_loss(x, y, LossConfig::squared(0.99, 0.7));
        if (std::abs(via_kernel - via_vectors) > 1e-9) {
            return fail(format_violation("kernel/vector loss gap",
                                         std::abs(via_kernel - via_vectors), 1e-9));
        }
    }
    return pass();
}

CheckResult batch_balance(std::uint64_t seed, int trials) {
    const LabelMatrix y = disjoint_classes(3, 5);
    for (int t = 0; t < std::min(trials, 64); ++t) {
        const auto batches =
            minterm_batch_sampler(y, 6, seed + static_cast<std::uint64_t>(t));
        std::set<int> seen;
        for (const auto &batch : batches) {
            std::vector<int> per_class(3, 0);
            for (int idx : batch) {
                ++per_class[static_cast<std::size_t>(idx / 5)];
                if (!seen.insert(idx).second) {
                    return fail("an index repeated within an epoch");
                }
            }
            for (int count : per_class) {
                if (count != 2) {
                    return fail("a batch lost per-minterm balance");
                }
            }
        }
        if (seen.size() < 12) {
            return fail("epoch covered fewer indices than expected");
        }
    }
    return pass();
}

CheckResult descent_determinism(std::uint64_t seed, int trials) {
    const LabelMatrix y = disjoint_classes(3, 3);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    DescentConfig dcfg;
    dcfg.epochs = std::min(trials, 60);
    dcfg.seed = seed;
    const Trajectory a = minimize_loss(y, 3, cfg, dcfg);
    const Trajectory b = minimize_loss(y, 3, cfg, dcfg);
    if (a.losses != b.losses || (a.final - b.final).cwiseAbs().maxCoeff() != 0.0) {
        return fail("same seed produced different trajectories");
    }
    dcfg.backtracking = true;
    const Trajectory c = minimize_loss(y, 3, cfg, dcfg);
    for (std::size_t i = 1; i < c.losses.size(); ++i) {
        if (c.losses[i] > c.losses[i - 1] + 1e-9) {
            return fail("a backtracking step increased the loss");
        }
    }
    return pass();
}

} // namespace

const std::vector<Check> &all_checks() {
    static const std::vector<Check> checks = {
        {"nuclear-invariance", "nuclear norm invariance to orthogonal transformations",
         nuclear_invariance},
        {"nuclear-triangle", "nuclear norm triangle inequality", nuclear_triangle},
        {"norm-bounds", "spectral <= nuclear <= rank * spectral", norm_bounds},
        {"unit-column-max", "max nuclear norm d*sqrt(n/d) over unit-column matrices",
         unit_column_max},
        {"stacked-spectrum", "stacked Stiefel frame spectrum sqrt(1 +- sigma_i)",
         stacked_spectrum},
        {"offdiag-spectrum", "off-diagonal block eigenvalues {-sigma, +sigma}",
         offdiag_spectrum},
        {"stacked-min", "stacked nuclear norm minimized at vx = vy", stacked_min},
        {"tstar-equation", "t* residual and bound for the scalar equation", tstar_equation},
        {"minimizer-family", "closed-form minimizers share the loss value and are local minima",
         minimizer_family},
        {"minterm-orthogonality", "distinct minterms embed orthogonally at the minimizer",
         minterm_orthogonality},
        {"subgradient-norm", "nuclear subgradient has unit dual norm", subgradient_norm},
        {"subgradient-fd", "subgradient matches finite differences", subgradient_fd},
        {"loss-gauge", "loss invariance under rotations and permutations", loss_gauge},
        {"covariance-reg", "per-coordinate std-dev sum equals the nuclear norm when diagonal",
         covariance_reg},
        {"lattice-laws", "Boolean lattice laws for commuting projections", lattice_laws},
        {"posterior-normalization", "minterm posteriors normalize and add", posterior_normalization},
        {"kernel-consistency", "Gram-matrix loss equals the vector loss", kernel_consistency},
        {"batch-balance", "minterm batches stay balanced without replacement", batch_balance},
        {"descent-determinism", "seeded descent is deterministic; backtracking never increases",
         descent_determinism},
    };
    return checks;
}

} // namespace subspace::verify
