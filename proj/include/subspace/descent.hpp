#pragma once

#include "subspace/errors.hpp"
#include "subspace/loss.hpp"
#include "subspace/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace subspace {

/// Subgradient descent settings. With `milestones` empty the step halves
/// whenever the loss has not improved for `patience` accepted iterations;
/// otherwise the step is multiplied by `decay` at each listed epoch.
struct DescentConfig {
    double step_size = 0.05;
    double decay = 0.5;
    int epochs = 2000;
    int batch_size = 0; ///< 0 = full batch; otherwise uses the minterm sampler
    std::uint64_t seed = 0;
    std::vector<int> milestones;
    int patience = 50;
    double init_scale = 0.1;      ///< X starts at init_scale * Gaussian
    bool backtracking = false;    ///< full-batch only: halve the step until non-increasing
    double divergence_cap = 1e12; ///< loss above this raises DivergenceError
};

/// Loss value and singular-value snapshot per iteration (the init counts
/// as iteration 0), plus the final embedding matrix.
struct Trajectory {
    std::vector<double> losses;
    std::vector<Vector> spectra; ///< sorted descending, one per iteration
    Matrix final;

    std::size_t iterations() const { return losses.size(); }
};

/// Raised when the loss exceeds the divergence cap. Carries the trajectory
/// accumulated so far.
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string &message, Trajectory prefix)
        : Error(message), prefix_(std::move(prefix)) {}

    const Trajectory &prefix() const { return prefix_; }

  private:
    Trajectory prefix_;
};

/// Subgradient descent on joint_loss from a seeded Gaussian init.
/// Deterministic given the seeds; requires d >= rank(Y).
Trajectory minimize_loss(const LabelMatrix &y, Index d, const LossConfig &cfg,
                         const DescentConfig &dcfg);

/// Same driver on a baseline objective (always full batch).
Trajectory minimize_baseline(const LabelMatrix &y, Index d, BaselineKind kind,
                             const DescentConfig &dcfg);

/// Balanced batches for one epoch: every batch holds exactly
/// batch_size / #minterms samples of each observed minterm, drawn without
/// replacement from per-minterm decks shuffled by `seed`. Throws
/// BatchShapeError when batch_size is not divisible by the minterm count
/// and InsufficientSamples when a minterm cannot fill a single batch.
std::vector<std::vector<int>> minterm_batch_sampler(const LabelMatrix &y, int batch_size,
                                                    std::uint64_t seed);

/// Per-iteration singular values as a CSV-ready table.
struct TraceTable {
    std::vector<std::string> header; ///< iter, s1, ..., sd
    std::vector<std::vector<double>> rows;
};

TraceTable singular_value_trace(const Trajectory &t);

/// Writes `iter,loss,s1..sd` rows for the whole trajectory.
void write_trajectory_csv(const std::filesystem::path &path, const Trajectory &t);

} // namespace subspace
