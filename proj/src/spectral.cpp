#include "subspace/spectral.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace subspace {

namespace {

// Entries below this count as zero when locating the leading entry of a
// unit-norm singular vector.
constexpr double kSignEps = 1e-12;

void require_finite(const Matrix &m, const char *what) {
    if (m.size() == 0) {
        throw InvalidMatrix(std::string(what) + ": matrix is empty");
    }
    if (!m.allFinite()) {
        throw InvalidMatrix(std::string(what) + ": matrix has NaN or Inf entries");
    }
}

} // namespace

StiefelFrame::StiefelFrame(Matrix frame) : frame_(std::move(frame)) {
    require_finite(frame_, "StiefelFrame");
    if (frame_.rows() < frame_.cols()) {
        throw DimensionError("StiefelFrame: need rows >= cols, got " +
                             std::to_string(frame_.rows()) + " x " +
                             std::to_string(frame_.cols()));
    }
    const Matrix gram = frame_.transpose() * frame_;
    const double dev =
        (gram - Matrix::Identity(frame_.cols(), frame_.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-8) {
        throw InvalidMatrix("StiefelFrame: columns not orthonormal (deviation " +
                            std::to_string(dev) + ")");
    }
}

SvdFactors svd(const Matrix &m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    for (Index j = 0; j < f.left.cols(); ++j) {
        for (Index i = 0; i < f.left.rows(); ++i) {
            if (std::abs(f.left(i, j)) > kSignEps) {
                if (f.left(i, j) < 0.0) {
                    f.left.col(j) = -f.left.col(j);
                    f.right.col(j) = -f.right.col(j);
                }
                break;
            }
        }
    }
    return f;
}

Vector singular_values(const Matrix &m) {
    require_finite(m, "singular_values");
    Eigen::JacobiSVD<Matrix> solver(m);
    return solver.singularValues();
}

double nuclear_norm(const Matrix &m) { return singular_values(m).sum(); }

double spectral_norm(const Matrix &m) {
    const Vector sv = singular_values(m);
    return sv.size() > 0 ? sv(0) : 0.0;
}

Index numerical_rank(const Vector &sv) {
    if (sv.size() == 0 || sv(0) <= 0.0) {
        return 0;
    }
    const double cutoff = tolerances().rank_rel * sv(0);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) {
        ++r;
    }
    return r;
}

Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed, double scale) {
    if (rows < 1 || cols < 1) {
        throw DimensionError("gaussian_matrix: need rows, cols >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            g(i, j) = scale * normal(rng);
        }
    }
    return g;
}

StiefelFrame random_stiefel(Index n, Index d, std::uint64_t seed) {
    if (d < 1) {
        throw DimensionError("random_stiefel: need d >= 1");
    }
    if (n < d) {
        throw DimensionError("random_stiefel: need n >= d, got n=" + std::to_string(n) +
                             ", d=" + std::to_string(d));
    }
    const Matrix g = gaussian_matrix(n, d, seed);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, d);
    // Positive R diagonal makes Q the unique orthonormal factor.
    for (Index j = 0; j < d; ++j) {
        if (qr.matrixQR()(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return StiefelFrame(std::move(q));
}

std::vector<double> stacked_stiefel_spectrum(const StiefelFrame &vy, const StiefelFrame &vx) {
    if (vy.rows() != vx.rows() || vy.cols() != vx.cols()) {
        throw DimensionError("stacked_stiefel_spectrum: frames must share shape, got " +
                             std::to_string(vy.rows()) + "x" + std::to_string(vy.cols()) +
                             " vs " + std::to_string(vx.rows()) + "x" +
                             std::to_string(vx.cols()));
    }
    const Matrix overlap = vy.matrix().transpose() * vx.matrix();
    const Vector cosines = singular_values(overlap); // cos of the principal angles, descending

    // sqrt(1 - cos) cancels catastrophically near cos = 1, so take the
    // sines from the residual (I - Vy Vy^T) Vx and use
    // sqrt(1 - c) = sin / sqrt(1 + c). Sines ascend as cosines descend.
    const Matrix residual = vx.matrix() - vy.matrix() * overlap;
    Vector sines = singular_values(residual);
    std::sort(sines.data(), sines.data() + sines.size());

    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(cosines.size()));
    for (Index i = 0; i < cosines.size(); ++i) {
        const double c = std::clamp(cosines(i), 0.0, 1.0);
        const double plus = std::sqrt(1.0 + c);
        out.push_back(plus);
        out.push_back(std::min(sines(i), 1.0) / plus);
    }
    std::sort(out.begin(), out.end(), std::greater<double>());
    return out;
}

std::vector<double> offdiag_block_spectrum(const Matrix &m) {
    require_finite(m, "offdiag_block_spectrum");
    if (m.rows() != m.cols()) {
        throw DimensionError("offdiag_block_spectrum: matrix must be square, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const Vector s = singular_values(m);
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(s.size()));
    for (Index i = 0; i < s.size(); ++i) {
        out.push_back(-s(i));
        out.push_back(s(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace subspace
