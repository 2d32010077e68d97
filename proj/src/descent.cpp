#include "subspace/descent.hpp"

#include "subspace/errors.hpp"
#include "subspace/lattice.hpp"
#include "subspace/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

namespace subspace {

namespace {

constexpr int kMaxBacktracks = 40;

void record(Trajectory &traj, double loss, const Matrix &x) {
    traj.losses.push_back(loss);
    traj.spectra.push_back(singular_values(x));
}

// Shared descent loop over an arbitrary objective/subgradient pair.
Trajectory run_descent(const Matrix &init, const DescentConfig &dcfg,
                       const std::function<double(const Matrix &)> &objective,
                       const std::function<Matrix(const Matrix &)> &subgradient,
                       const std::vector<std::vector<std::vector<int>>> *epoch_batches,
                       const std::function<double(Matrix &, double, const std::vector<int> &)>
                           &batch_step) {
    Trajectory traj;
    Matrix x = init;
    double loss = objective(x);
    record(traj, loss, x);

    double step = dcfg.step_size;
    double best = loss;
    int stale = 0;

    auto check_divergence = [&](double value) {
        if (!std::isfinite(value) || value > dcfg.divergence_cap) {
            traj.final = x;
            throw DivergenceError("descent diverged: loss = " + std::to_string(value),
                                  std::move(traj));
        }
    };

    for (int epoch = 0; epoch < dcfg.epochs; ++epoch) {
        if (!dcfg.milestones.empty() &&
            std::find(dcfg.milestones.begin(), dcfg.milestones.end(), epoch) !=
                dcfg.milestones.end()) {
            step *= dcfg.decay;
        }

        if (epoch_batches != nullptr) {
            for (const auto &batch : (*epoch_batches)[static_cast<std::size_t>(epoch)]) {
                batch_step(x, step, batch);
                loss = objective(x);
                check_divergence(loss);
                record(traj, loss, x);
            }
        } else {
            const Matrix g = subgradient(x);
            double trial_step = step;
            Matrix candidate = x - trial_step * g;
            double candidate_loss = objective(candidate);
            if (dcfg.backtracking) {
                int tries = 0;
                while (candidate_loss > loss && tries < kMaxBacktracks) {
                    trial_step *= 0.5;
                    candidate = x - trial_step * g;
                    candidate_loss = objective(candidate);
                    ++tries;
                }
                if (candidate_loss > loss) {
                    // No acceptable step along the subgradient; shrink the
                    // base step and keep the iterate.
                    step *= dcfg.decay;
                    candidate = x;
                    candidate_loss = loss;
                }
            }
            x = candidate;
            loss = candidate_loss;
            check_divergence(loss);
            record(traj, loss, x);
        }

        if (dcfg.milestones.empty()) {
            if (loss < best - 1e-14) {
                best = loss;
                stale = 0;
            } else if (++stale >= dcfg.patience) {
                step *= dcfg.decay;
                stale = 0;
            }
        }
    }

    traj.final = std::move(x);
    return traj;
}

} // namespace

Trajectory minimize_loss(const LabelMatrix &y, Index d, const LossConfig &cfg,
                         const DescentConfig &dcfg) {
    cfg.validate();
    const Index rank_y = numerical_rank(singular_values(y.matrix()));
    if (d < rank_y) {
        throw DimensionError("minimize_loss: need d >= rank(Y) = " + std::to_string(rank_y) +
                             ", got d = " + std::to_string(d));
    }
    if (dcfg.batch_size > y.sample_count()) {
        throw BatchShapeError("minimize_loss: batch size exceeds the sample count");
    }
    if (!(dcfg.step_size > 0.0) || !std::isfinite(dcfg.step_size)) {
        throw ConfigError("minimize_loss: step size must be positive and finite");
    }

    const Matrix init = gaussian_matrix(d, y.sample_count(), dcfg.seed, dcfg.init_scale);

    auto objective = [&](const Matrix &x) { return joint_loss(x, y, cfg); };
    auto subgradient = [&](const Matrix &x) { return loss_subgradient(x, y, cfg); };

    if (dcfg.batch_size <= 0) {
        return run_descent(init, dcfg, objective, subgradient, nullptr, {});
    }

    // Pre-draw every epoch's balanced batches so the RNG stream is fixed
    // up front and the loop stays deterministic.
    std::vector<std::vector<std::vector<int>>> epoch_batches(
        static_cast<std::size_t>(dcfg.epochs));
    for (int e = 0; e < dcfg.epochs; ++e) {
        epoch_batches[static_cast<std::size_t>(e)] = minterm_batch_sampler(
            y, dcfg.batch_size, dcfg.seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(e) + 1));
    }

    auto batch_step = [&](Matrix &x, double step, const std::vector<int> &batch) {
        Matrix xb(x.rows(), static_cast<Index>(batch.size()));
        for (std::size_t k = 0; k < batch.size(); ++k) {
            xb.col(static_cast<Index>(k)) = x.col(batch[k]);
        }
        const LabelMatrix yb = y.columns(batch);
        const Matrix g = loss_subgradient(xb, yb, cfg);
        for (std::size_t k = 0; k < batch.size(); ++k) {
            x.col(batch[k]) -= step * g.col(static_cast<Index>(k));
        }
        return 0.0;
    };
    return run_descent(init, dcfg, objective, subgradient, &epoch_batches, batch_step);
}

Trajectory minimize_baseline(const LabelMatrix &y, Index d, BaselineKind kind,
                             const DescentConfig &dcfg) {
    const Matrix init = gaussian_matrix(d, y.sample_count(), dcfg.seed, dcfg.init_scale);
    auto objective = [&](const Matrix &x) { return baseline_loss(x, y, kind); };
    auto subgradient = [&](const Matrix &x) { return baseline_subgradient(x, y, kind); };
    return run_descent(init, dcfg, objective, subgradient, nullptr, {});
}

std::vector<std::vector<int>> minterm_batch_sampler(const LabelMatrix &y, int batch_size,
                                                    std::uint64_t seed) {
    const MintermTable table = extract_minterms(y);
    const int m = static_cast<int>(table.size());
    if (batch_size < 1) {
        throw BatchShapeError("minterm_batch_sampler: batch size must be positive");
    }
    if (batch_size % m != 0) {
        throw BatchShapeError("minterm_batch_sampler: batch size " + std::to_string(batch_size) +
                              " is not divisible by the " + std::to_string(m) +
                              " observed minterms");
    }
    const int per_minterm = batch_size / m;

    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> decks;
    decks.reserve(static_cast<std::size_t>(m));
    std::size_t batches_per_epoch = std::numeric_limits<std::size_t>::max();
    for (const auto &indices : table.index_sets) {
        if (static_cast<int>(indices.size()) < per_minterm) {
            throw InsufficientSamples("minterm_batch_sampler: a minterm has only " +
                                      std::to_string(indices.size()) + " samples but " +
                                      std::to_string(per_minterm) + " are needed per batch");
        }
        std::vector<int> deck = indices;
        std::shuffle(deck.begin(), deck.end(), rng);
        batches_per_epoch = std::min(batches_per_epoch,
                                     deck.size() / static_cast<std::size_t>(per_minterm));
        decks.push_back(std::move(deck));
    }

    std::vector<std::vector<int>> batches(batches_per_epoch);
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
        auto &batch = batches[b];
        batch.reserve(static_cast<std::size_t>(batch_size));
        for (const auto &deck : decks) {
            for (int k = 0; k < per_minterm; ++k) {
                batch.push_back(deck[b * static_cast<std::size_t>(per_minterm) +
                                     static_cast<std::size_t>(k)]);
            }
        }
        std::shuffle(batch.begin(), batch.end(), rng);
    }
    return batches;
}

TraceTable singular_value_trace(const Trajectory &t) {
    if (t.spectra.empty()) {
        throw Error("singular_value_trace: empty trajectory");
    }
    TraceTable table;
    table.header.push_back("iter");
    for (Index i = 0; i < t.spectra.front().size(); ++i) {
        table.header.push_back("s" + std::to_string(i + 1));
    }
    for (std::size_t it = 0; it < t.spectra.size(); ++it) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(t.spectra[it].size()) + 1);
        row.push_back(static_cast<double>(it));
        for (Index i = 0; i < t.spectra[it].size(); ++i) {
            row.push_back(t.spectra[it](i));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_trajectory_csv(const std::filesystem::path &path, const Trajectory &t) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << "iter,loss";
    const Index d = t.spectra.empty() ? 0 : t.spectra.front().size();
    for (Index i = 0; i < d; ++i) {
        out << ",s" << (i + 1);
    }
    out << "\n";
    char buf[40];
    for (std::size_t it = 0; it < t.losses.size(); ++it) {
        out << it;
        std::snprintf(buf, sizeof(buf), "%.17g", t.losses[it]);
        out << "," << buf;
        for (Index i = 0; i < d; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", t.spectra[it](i));
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace subspace
