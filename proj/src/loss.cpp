#include "subspace/loss.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <cmath>
#include <vector>

namespace subspace {

namespace {

constexpr double kBinaryEps = 1e-9;

// Singular values within this relative distance of sigma_1 count as tied
// for the spectral-penalty subgradient. Wide enough that descent does not
// stall chattering across the tie manifold, far below any genuine gap.
constexpr double kSpectralTieRel = 1e-4;

Matrix stack(const LabelMatrix &y, const Matrix &x) {
    if (x.cols() != y.sample_count()) {
        throw DimensionError("joint loss: X has " + std::to_string(x.cols()) +
                             " columns but Y has " + std::to_string(y.sample_count()));
    }
    Matrix z(y.label_count() + x.rows(), x.cols());
    z.topRows(y.label_count()) = y.matrix();
    z.bottomRows(x.rows()) = x;
    return z;
}

// Rank-restricted U V^T from precomputed factors.
Matrix restricted_uvt(const SvdFactors &f, Index rows, Index cols) {
    const Index r = numerical_rank(f.singular_values);
    if (r == 0) {
        return Matrix::Zero(rows, cols);
    }
    return f.left.leftCols(r) * f.right.leftCols(r).transpose();
}

// Per-label sample index sets; throws EmptyClass when a label row has no
// positive sample.
std::vector<std::vector<int>> label_classes(const LabelMatrix &y) {
    std::vector<std::vector<int>> classes(y.label_count());
    for (Index l = 0; l < y.label_count(); ++l) {
        for (Index j = 0; j < y.sample_count(); ++j) {
            if (y.matrix()(l, j) > 0.5) {
                classes[l].push_back(static_cast<int>(j));
            }
        }
        if (classes[l].empty()) {
            throw EmptyClass("baseline: label row " + std::to_string(l) +
                             " has no positive sample");
        }
    }
    return classes;
}

Matrix select_columns(const Matrix &m, const std::vector<int> &indices) {
    Matrix out(m.rows(), static_cast<Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.col(static_cast<Index>(k)) = m.col(indices[k]);
    }
    return out;
}

Matrix normalized_columns(const Matrix &x) {
    Matrix n = x;
    for (Index j = 0; j < n.cols(); ++j) {
        const double norm = n.col(j).norm();
        if (norm < 1e-12) {
            throw NormalizationError("MMCR baseline: column " + std::to_string(j) +
                                     " has zero norm");
        }
        n.col(j) /= norm;
    }
    return n;
}

Matrix centroid_matrix(const Matrix &normalized, const std::vector<std::vector<int>> &classes) {
    Matrix c(static_cast<Index>(classes.size()), normalized.rows());
    for (std::size_t l = 0; l < classes.size(); ++l) {
        Vector mean = Vector::Zero(normalized.rows());
        for (int j : classes[l]) {
            mean += normalized.col(j);
        }
        c.row(static_cast<Index>(l)) = mean.transpose() / static_cast<double>(classes[l].size());
    }
    return c;
}

} // namespace

std::string to_string(LossVariant v) {
    switch (v) {
    case LossVariant::NoPenalty:
        return "no-penalty";
    case LossVariant::SpectralPenalty:
        return "spectral";
    case LossVariant::SquaredSpectralPenalty:
        return "squared";
    }
    return "unknown";
}

LossVariant loss_variant_from_string(const std::string &name) {
    if (name == "no-penalty" || name == "none") {
        return LossVariant::NoPenalty;
    }
    if (name == "spectral") {
        return LossVariant::SpectralPenalty;
    }
    if (name == "squared") {
        return LossVariant::SquaredSpectralPenalty;
    }
    throw ConfigError("unknown loss variant '" + name +
                      "' (expected no-penalty, spectral or squared)");
}

void LossConfig::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ConfigError("loss config: alpha/beta must be finite");
    }
    switch (variant) {
    case LossVariant::NoPenalty:
        if (alpha <= 0.0 || alpha >= 1.0) {
            throw InvalidAlpha("no-penalty variant needs alpha in (0,1), got " +
                               std::to_string(alpha));
        }
        break;
    case LossVariant::SpectralPenalty:
        if (alpha != 1.0) {
            throw InvalidAlpha("spectral variant fixes alpha = 1, got " +
                               std::to_string(alpha));
        }
        if (beta <= 0.0 || beta >= 1.0) {
            throw ConfigError("spectral variant needs beta in (0,1), got " +
                              std::to_string(beta));
        }
        break;
    case LossVariant::SquaredSpectralPenalty:
        if (alpha <= 0.0 || alpha >= 1.0) {
            throw InvalidAlpha("squared variant needs alpha in (0,1), got " +
                               std::to_string(alpha));
        }
        if (beta <= 0.0 || beta >= 1.0) {
            throw ConfigError("squared variant needs beta in (0,1), got " +
                              std::to_string(beta));
        }
        break;
    }
}

LabelMatrix::LabelMatrix(Matrix y) : y_(std::move(y)) {
    if (y_.rows() < 1 || y_.cols() < 1) {
        throw InvalidMatrix("LabelMatrix: empty matrix");
    }
    for (Index i = 0; i < y_.rows(); ++i) {
        for (Index j = 0; j < y_.cols(); ++j) {
            const double v = y_(i, j);
            if (std::abs(v) < kBinaryEps) {
                y_(i, j) = 0.0;
            } else if (std::abs(v - 1.0) < kBinaryEps) {
                y_(i, j) = 1.0;
            } else {
                throw InvalidMatrix("LabelMatrix: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") = " + std::to_string(v) +
                                    " is not binary");
            }
        }
    }
}

LabelMatrix LabelMatrix::columns(const std::vector<int> &indices) const {
    return LabelMatrix(select_columns(y_, indices));
}

double joint_loss(const Matrix &x, const LabelMatrix &y, const LossConfig &cfg) {
    cfg.validate();
    const Matrix z = stack(y, x);
    const double zn = nuclear_norm(z);
    const Vector sx = singular_values(x);
    const double xn = sx.sum();
    const double x2 = sx.size() > 0 ? sx(0) : 0.0;
    switch (cfg.variant) {
    case LossVariant::NoPenalty:
        return zn - cfg.alpha * xn;
    case LossVariant::SpectralPenalty:
        return zn - xn + cfg.beta * x2;
    case LossVariant::SquaredSpectralPenalty:
        return zn - cfg.alpha * xn + cfg.beta * x2 * x2;
    }
    throw ConfigError("joint_loss: unreachable variant");
}

Matrix nuclear_subgradient(const Matrix &x) {
    const SvdFactors f = svd(x);
    return restricted_uvt(f, x.rows(), x.cols());
}

Matrix loss_subgradient(const Matrix &x, const LabelMatrix &y, const LossConfig &cfg) {
    cfg.validate();
    const Matrix z = stack(y, x);
    const SvdFactors fz = svd(z);
    Matrix g = restricted_uvt(fz, z.rows(), z.cols()).bottomRows(x.rows());

    const SvdFactors fx = svd(x);
    const Index rx = numerical_rank(fx.singular_values);
    if (rx == 0) {
        return g; // zero X contributes nothing beyond the stacked term
    }
    g.noalias() -= cfg.alpha * (fx.left.leftCols(rx) * fx.right.leftCols(rx).transpose());

    if (cfg.variant != LossVariant::NoPenalty) {
        const double s1 = fx.singular_values(0);
        Index tied = 1;
        while (tied < rx && fx.singular_values(tied) >= s1 * (1.0 - kSpectralTieRel)) {
            ++tied;
        }
        const Matrix top = fx.left.leftCols(tied) * fx.right.leftCols(tied).transpose() /
                           static_cast<double>(tied);
        const double weight =
            cfg.variant == LossVariant::SquaredSpectralPenalty ? 2.0 * cfg.beta * s1 : cfg.beta;
        g.noalias() += weight * top;
    }
    return g;
}

BaselineKind baseline_from_string(const std::string &name) {
    if (name == "ole" || name == "OLE") {
        return BaselineKind::OLE;
    }
    if (name == "mmcr" || name == "MMCR") {
        return BaselineKind::MMCR;
    }
    throw ConfigError("unknown baseline '" + name + "' (expected ole or mmcr)");
}

double baseline_loss(const Matrix &x, const LabelMatrix &y, BaselineKind kind) {
    if (x.cols() != y.sample_count()) {
        throw DimensionError("baseline: X and Y column counts differ");
    }
    const auto classes = label_classes(y);
    if (kind == BaselineKind::MMCR) {
        const Matrix c = centroid_matrix(normalized_columns(x), classes);
        return -nuclear_norm(c);
    }
    double intra = 0.0;
    for (const auto &cls : classes) {
        intra += std::max(kOleFloor, nuclear_norm(select_columns(x, cls)));
    }
    return intra - nuclear_norm(x);
}

Matrix baseline_subgradient(const Matrix &x, const LabelMatrix &y, BaselineKind kind) {
    if (x.cols() != y.sample_count()) {
        throw DimensionError("baseline: X and Y column counts differ");
    }
    const auto classes = label_classes(y);
    Matrix g = Matrix::Zero(x.rows(), x.cols());

    if (kind == BaselineKind::OLE) {
        for (const auto &cls : classes) {
            const Matrix block = select_columns(x, cls);
            if (nuclear_norm(block) > kOleFloor) {
                const Matrix sub = nuclear_subgradient(block);
                for (std::size_t k = 0; k < cls.size(); ++k) {
                    g.col(cls[k]) += sub.col(static_cast<Index>(k));
                }
            }
        }
        g -= nuclear_subgradient(x);
        return g;
    }

    // MMCR: chain rule through normalization and per-class averaging.
    const Matrix n = normalized_columns(x);
    const Matrix c = centroid_matrix(n, classes);
    const Matrix dc = -nuclear_subgradient(c); // d(-||C||_*)/dC
    Matrix dn = Matrix::Zero(n.rows(), n.cols());
    for (std::size_t l = 0; l < classes.size(); ++l) {
        const double w = 1.0 / static_cast<double>(classes[l].size());
        for (int j : classes[l]) {
            dn.col(j) += w * dc.row(static_cast<Index>(l)).transpose();
        }
    }
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        const Vector nj = n.col(j);
        g.col(j) = (dn.col(j) - nj * nj.dot(dn.col(j))) / norm;
    }
    return g;
}

CovarianceRegObjective covariance_reg_objective(const Matrix &x) {
    if (!x.allFinite()) {
        throw InvalidMatrix("covariance_reg_objective: non-finite input");
    }
    const Matrix cov = x * x.transpose();
    double value = 0.0;
    double violation = 0.0;
    for (Index i = 0; i < cov.rows(); ++i) {
        value += std::sqrt(std::max(0.0, cov(i, i)));
        for (Index j = 0; j < cov.cols(); ++j) {
            if (i != j) {
                violation = std::max(violation, std::abs(cov(i, j)));
            }
        }
    }
    return {value, violation};
}

} // namespace subspace
