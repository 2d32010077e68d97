#include "subspace/descent.hpp"

#include "subspace/closed_form.hpp"
#include "subspace/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace subspace;
using namespace subspace::testing;

namespace {

LabelMatrix disjoint_classes(Index classes, Index per_class) {
    Matrix y = Matrix::Zero(classes, classes * per_class);
    for (Index c = 0; c < classes; ++c) {
        for (Index s = 0; s < per_class; ++s) {
            y(c, c * per_class + s) = 1.0;
        }
    }
    return LabelMatrix(y);
}

} // namespace

TEST_CASE("zero epochs returns the seeded init") {
    const LabelMatrix y = disjoint_classes(2, 3);
    DescentConfig dcfg;
    dcfg.epochs = 0;
    dcfg.seed = 9;
    const Trajectory traj = minimize_loss(y, 2, LossConfig::squared(0.99, 0.7), dcfg);
    CHECK(traj.iterations() == 1);
    CHECK(max_abs_diff(traj.final, gaussian_matrix(2, 6, 9, 0.1)) == 0.0);
}

TEST_CASE("identical seeds give bitwise-identical trajectories") {
    const LabelMatrix y = disjoint_classes(3, 4);
    DescentConfig dcfg;
    dcfg.epochs = 40;
    dcfg.seed = 4;
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    const Trajectory a = minimize_loss(y, 3, cfg, dcfg);
    const Trajectory b = minimize_loss(y, 3, cfg, dcfg);
    REQUIRE(a.iterations() == b.iterations());
    CHECK(max_abs_diff(a.final, b.final) == 0.0);
    for (std::size_t i = 0; i < a.losses.size(); ++i) {
        CHECK(a.losses[i] == b.losses[i]);
    }
}

TEST_CASE("backtracking never accepts an increasing step") {
    const LabelMatrix y = disjoint_classes(3, 4);
    DescentConfig dcfg;
    dcfg.epochs = 200;
    dcfg.seed = 2;
    dcfg.backtracking = true;
    const Trajectory traj = minimize_loss(y, 3, LossConfig::squared(0.99, 0.7), dcfg);
    for (std::size_t i = 1; i < traj.losses.size(); ++i) {
        CHECK(traj.losses[i] <= traj.losses[i - 1] + 1e-9);
    }
}

TEST_CASE("full-batch descent reaches the closed-form spectrum") {
    // mu_i = sqrt(5) for 3 disjoint classes of 5 samples.
    const LabelMatrix y = disjoint_classes(3, 5);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    const double t_star =
        solve_t_star({std::sqrt(5.0), std::sqrt(5.0), std::sqrt(5.0)}, 3, 0.99, 0.7);

    DescentConfig dcfg;
    dcfg.epochs = 12000;
    dcfg.step_size = 0.05;
    dcfg.seed = 1;
    const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
    const Vector sv = traj.spectra.back();
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(sv(i) - t_star) / t_star < 1e-3);
    }
    const double min_loss = joint_loss(minimizer(y, 3, cfg, 0).materialize(), y, cfg);
    CHECK(std::abs(traj.losses.back() - min_loss) / std::abs(min_loss) < 1e-3);
}

TEST_CASE("two inits agree on spectrum and normalized Gram") {
    const LabelMatrix y = disjoint_classes(3, 5);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    DescentConfig dcfg;
    dcfg.epochs = 12000;
    dcfg.step_size = 0.05;

    dcfg.seed = 1;
    const Trajectory a = minimize_loss(y, 3, cfg, dcfg);
    dcfg.seed = 2;
    const Trajectory b = minimize_loss(y, 3, cfg, dcfg);

    const Vector sa = a.spectra.back();
    const Vector sb = b.spectra.back();
    const double t_star = sa(0);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(sa(i) - sb(i)) < 1e-3 * t_star);
    }

    // The family differs only by the left frame U, so X^T X / t*^2 matches.
    const Matrix ga = a.final.transpose() * a.final / (t_star * t_star);
    const Matrix gb = b.final.transpose() * b.final / (t_star * t_star);
    CHECK(max_abs_diff(ga, gb) < 1e-2);
}

TEST_CASE("descent matches the closed form on the other loss variants") {
    const LabelMatrix y = disjoint_classes(3, 4); // mu_i = 2
    DescentConfig dcfg;
    dcfg.epochs = 20000;
    dcfg.step_size = 0.05;
    dcfg.milestones = {8000, 12000, 15000, 17000, 19000};
    dcfg.seed = 2;

    SUBCASE("spectral penalty") {
        const LossConfig cfg = LossConfig::spectral(0.5);
        const double t_star = solve_t_star_spectral({2.0, 2.0, 2.0}, 3, 0.5);
        const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(traj.spectra.back()(i) - t_star) / t_star < 2e-3);
        }
        const double closed = joint_loss(minimizer(y, 3, cfg, 1).materialize(), y, cfg);
        CHECK(std::abs(traj.losses.back() - closed) / std::abs(closed) < 1e-3);
    }

    SUBCASE("no penalty") {
        const LossConfig cfg = LossConfig::no_penalty(0.6);
        const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(traj.spectra.back()(i) - 1.5) / 1.5 < 2e-3); // 0.75 * mu_i
        }
        const double closed = joint_loss(minimizer(y, 3, cfg, 1).materialize(), y, cfg);
        CHECK(std::abs(traj.losses.back() - closed) / std::abs(closed) < 1e-3);
    }
}

TEST_CASE("descent rejects d below the label rank") {
    CHECK_THROWS_AS(
        minimize_loss(disjoint_classes(3, 2), 2, LossConfig::squared(0.99, 0.7), {}),
        DimensionError);
}

TEST_CASE("divergence raises with the trajectory prefix") {
    const LabelMatrix y = disjoint_classes(3, 4);
    DescentConfig dcfg;
    dcfg.epochs = 400;
    dcfg.step_size = 1e9; // absurd step, no backtracking: loss blows up
    dcfg.backtracking = false;
    dcfg.seed = 3;
    try {
        minimize_loss(y, 3, LossConfig::squared(0.99, 0.7), dcfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError &e) {
        CHECK(e.prefix().iterations() >= 1);
        CHECK(e.prefix().losses.front() < 1e12);
    }
}

TEST_CASE("minterm batch sampler balance and coverage") {
    const LabelMatrix y = disjoint_classes(3, 5);

    SUBCASE("each batch holds batch/m samples per minterm") {
        const auto batches = minterm_batch_sampler(y, 6, 11);
        REQUIRE(batches.size() == 2); // floor(5/2) per minterm
        for (const auto &batch : batches) {
            REQUIRE(batch.size() == 6);
            std::vector<int> per_class(3, 0);
            for (int idx : batch) {
                ++per_class[static_cast<std::size_t>(idx / 5)];
            }
            for (int count : per_class) {
                CHECK(count == 2);
            }
        }
    }

    SUBCASE("an epoch covers distinct indices without replacement") {
        const auto batches = minterm_batch_sampler(y, 6, 11);
        std::set<int> seen;
        for (const auto &batch : batches) {
            for (int idx : batch) {
                CHECK(seen.insert(idx).second); // no repeats within the epoch
            }
        }
        CHECK(seen.size() >= 12);
    }

    SUBCASE("indivisible batch size") {
        CHECK_THROWS_AS(minterm_batch_sampler(y, 5, 0), BatchShapeError);
    }

    SUBCASE("starving minterm") {
        // one minterm has a single sample but 2 per batch are required
        Matrix ym = Matrix::Zero(2, 5);
        ym(0, 0) = ym(0, 1) = ym(0, 2) = ym(0, 3) = 1.0;
        ym(1, 4) = 1.0;
        CHECK_THROWS_AS(minterm_batch_sampler(LabelMatrix(ym), 4, 0), InsufficientSamples);
    }

    SUBCASE("deterministic given the seed") {
        CHECK(minterm_batch_sampler(y, 6, 42) == minterm_batch_sampler(y, 6, 42));
    }
}

TEST_CASE("mini-batch descent produces the minterm-orthogonal structure") {
    // The batched loss has its own per-batch spectrum scale, so assert the
    // structural outcome rather than the full-data t*: equal top singular
    // values and orthogonality across classes in the normalized Gram.
    const LabelMatrix y = disjoint_classes(3, 4);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);
    DescentConfig dcfg;
    dcfg.epochs = 3000;
    dcfg.step_size = 0.02;
    dcfg.batch_size = 6;
    dcfg.seed = 8;
    const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
    CHECK(traj.iterations() > static_cast<std::size_t>(dcfg.epochs)); // several updates per epoch

    const Vector sv = traj.spectra.back();
    CHECK((sv(0) - sv(2)) / sv(0) < 0.02);

    Matrix n = traj.final;
    for (Index j = 0; j < n.cols(); ++j) {
        n.col(j).normalize();
    }
    const Matrix gram = n.transpose() * n;
    for (Index i = 0; i < 12; ++i) {
        for (Index j = 0; j < 12; ++j) {
            if (i / 4 != j / 4) {
                CHECK(std::abs(gram(i, j)) < 0.05);
            }
        }
    }
}

TEST_CASE("singular value trace") {
    const LabelMatrix y = disjoint_classes(3, 5);
    const LossConfig cfg = LossConfig::squared(0.99, 0.7);

    SUBCASE("zero-epoch run gives a single row of the init spectrum") {
        DescentConfig dcfg;
        dcfg.epochs = 0;
        dcfg.seed = 5;
        const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
        const TraceTable table = singular_value_trace(traj);
        REQUIRE(table.rows.size() == 1);
        CHECK(table.header.size() == 4); // iter, s1..s3
        CHECK(table.rows[0][0] == 0.0);
    }

    SUBCASE("converged trace ends at the t* spectrum with a monotone tail") {
        DescentConfig dcfg;
        dcfg.epochs = 12000;
        dcfg.step_size = 0.05;
        dcfg.seed = 1;
        const Trajectory traj = minimize_loss(y, 3, cfg, dcfg);
        const TraceTable table = singular_value_trace(traj);
        const double t_star =
            solve_t_star({std::sqrt(5.0), std::sqrt(5.0), std::sqrt(5.0)}, 3, 0.99, 0.7);
        const auto &last = table.rows.back();
        for (std::size_t i = 1; i < last.size(); ++i) {
            CHECK(std::abs(last[i] - t_star) < 2e-3 * t_star);
        }
        // tail stability over the last 10% of iterations
        const std::size_t tail_start = table.rows.size() - table.rows.size() / 10;
        for (std::size_t r = tail_start; r < table.rows.size(); ++r) {
            for (std::size_t i = 1; i < last.size(); ++i) {
                CHECK(std::abs(table.rows[r][i] - last[i]) < 1e-2 * t_star);
            }
        }
    }

    SUBCASE("empty trajectory is rejected") {
        CHECK_THROWS_AS(singular_value_trace(Trajectory{}), Error);
    }
}
