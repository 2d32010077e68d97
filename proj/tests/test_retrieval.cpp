#include "subspace/retrieval.hpp"

#include "subspace/closed_form.hpp"
#include "subspace/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace subspace;
using namespace subspace::testing;

TEST_CASE("generate_dataset shapes and determinism") {
    SUBCASE("full observation enumerates every minterm") {
        const SyntheticDataset ds = generate_dataset(2, 3, 1.0, 7);
        CHECK(ds.labels.label_count() == 2);
        CHECK(ds.labels.sample_count() == 12);
        const MintermTable t = extract_minterms(ds.labels);
        REQUIRE(t.size() == 4);
        for (const auto &set : t.index_sets) {
            CHECK(set.size() == 3);
        }
    }

    SUBCASE("the retrieval-scale shape: 25 of 32 minterms") {
        const SyntheticDataset ds = generate_dataset(5, 4, 25.0 / 32.0, 11);
        CHECK(extract_minterms(ds.labels).size() == 25);
        CHECK(ds.labels.sample_count() == 100);
        CHECK(ds.label_names == std::vector<std::string>{"a", "b", "c", "d", "e"});
    }

    SUBCASE("same seed, same dataset") {
        const SyntheticDataset a = generate_dataset(4, 2, 0.6, 3);
        const SyntheticDataset b = generate_dataset(4, 2, 0.6, 3);
        CHECK(max_abs_diff(a.labels.matrix(), b.labels.matrix()) == 0.0);
    }

    SUBCASE("rejects empty selections and oversized label counts") {
        CHECK_THROWS_AS(generate_dataset(3, 2, 0.01, 0), EmptyDataset);
        CHECK_THROWS_AS(generate_dataset(13, 2, 0.5, 0), DimensionError);
        CHECK_THROWS_AS(generate_dataset(3, 2, 1.5, 0), ConfigError);
    }
}

TEST_CASE("rank_by_query orders by posterior with index tie-break") {
    // axis-aligned columns so every posterior is exactly 0 or 1 and the
    // documented index tie-break is observable
    const MintermBasis basis = MintermBasis::from_columns(Matrix::Identity(3, 3));
    Matrix x(3, 4);
    x.col(0) = Vector::Unit(3, 1);
    x.col(1) = Vector::Unit(3, 0);
    x.col(2) = Vector::Unit(3, 0);
    x.col(3) = Vector::Unit(3, 2);

    const ProjectionOperator p0 = projection_operator({0}, basis);
    const RankedResult r = rank_by_query(x, p0, "axis0");
    CHECK(r.indices == std::vector<int>{1, 2, 0, 3});
    CHECK(r.scores[0] == 1.0);
    CHECK(r.scores[1] == 1.0);
    CHECK(r.scores[2] == 0.0);

    SUBCASE("empty minterm set scores everything zero, index order") {
        const RankedResult empty = rank_by_query(x, projection_operator({}, basis));
        CHECK(empty.indices == std::vector<int>{0, 1, 2, 3});
        for (double s : empty.scores) {
            CHECK(s == 0.0);
        }
    }

    SUBCASE("tautology scores everything one, index order") {
        const RankedResult full = rank_by_query(x, projection_operator({0, 1, 2}, basis));
        CHECK(full.indices == std::vector<int>{0, 1, 2, 3});
        for (double s : full.scores) {
            CHECK(s == doctest::Approx(1.0));
        }
    }

    SUBCASE("non-unit columns are rejected") {
        Matrix bad = x;
        bad.col(0) *= 2.0;
        CHECK_THROWS_AS(rank_by_query(bad, p0), NormalizationError);
    }
}

TEST_CASE("precision at k") {
    RankedResult r;
    r.indices = {4, 2, 7, 0, 1};
    r.scores = {0.9, 0.8, 0.7, 0.6, 0.5};

    CHECK(precision_at_k(r, {4, 2, 7}, 3) == doctest::Approx(1.0));
    CHECK(precision_at_k(r, {}, 3) == doctest::Approx(0.0));
    CHECK(precision_at_k(r, {4, 7}, 3) == doctest::Approx(2.0 / 3.0));
    CHECK_THROWS_AS(precision_at_k(r, {4}, 0), DimensionError);
    CHECK_THROWS_AS(precision_at_k(r, {4}, 6), DimensionError);
}

TEST_CASE("average precision") {
    RankedResult r;
    r.indices = {10, 11, 12};
    r.scores = {0.9, 0.8, 0.7};

    // hit at rank 1, miss at 2, hit at 3: (1/1 + 2/3) / 2 = 5/6
    CHECK(average_precision(r, {10, 12}) == doctest::Approx(5.0 / 6.0));
    CHECK(average_precision(r, {10, 11, 12}) == doctest::Approx(1.0));
    CHECK(average_precision(r, {12}) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(average_precision(r, {}), UndefinedMetric);
}

TEST_CASE("metric bounds, tie determinism and permutation invariance") {
    const MintermBasis basis = MintermBasis::from_columns(Matrix::Identity(3, 3));
    const ProjectionOperator p = projection_operator({0, 1}, basis);

    // distinct scores: relabeling samples relabels the ranking consistently
    Matrix x(3, 4);
    x.col(0) = Vector::Unit(3, 2);                                        // score 0
    x.col(1) = Vector::Unit(3, 0);                                        // score 1
    x.col(2) = (0.5 * Vector::Unit(3, 0) + std::sqrt(0.75) * Vector::Unit(3, 2)); // 0.25
    x.col(3) = (std::sqrt(0.75) * Vector::Unit(3, 1) + 0.5 * Vector::Unit(3, 2)); // 0.75
    const std::set<int> relevant{1, 3};
    const double base_ap = average_precision(rank_by_query(x, p), relevant);

    const std::vector<int> perm{2, 0, 3, 1};
    Matrix xp(3, 4);
    std::set<int> relabeled;
    for (int j = 0; j < 4; ++j) {
        xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
        if (relevant.count(perm[static_cast<std::size_t>(j)]) > 0) {
            relabeled.insert(j);
        }
    }
    CHECK(average_precision(rank_by_query(xp, p), relabeled) == base_ap);

    // bounds and rerun determinism, ties included
    Matrix tied(3, 4);
    tied.col(0) = tied.col(1) = Vector::Unit(3, 0);
    tied.col(2) = tied.col(3) = Vector::Unit(3, 2);
    const RankedResult a = rank_by_query(tied, p);
    const RankedResult b = rank_by_query(tied, p);
    CHECK(a.indices == b.indices);
    for (const auto &rel : {std::set<int>{0, 2}, std::set<int>{1}, std::set<int>{0, 1, 3}}) {
        const double ap = average_precision(a, rel);
        const double pr = precision_at_k(a, rel, 2);
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);
        CHECK(pr >= 0.0);
        CHECK(pr <= 1.0);
        CHECK(average_precision(b, rel) == ap);
    }
}

TEST_CASE("closed-form embeddings retrieve perfectly") {
    const SyntheticDataset ds = generate_dataset(3, 3, 1.0, 5);
    const MintermTable table = extract_minterms(ds.labels);
    // Embeddings from the minterm-indicator closed form: the geometry the
    // balanced-batch training realizes on the raw labels.
    Matrix x = minimizer(minterm_indicator(table), 8, LossConfig::squared(0.99, 0.7), 4)
                   .materialize();
    for (Index j = 0; j < x.cols(); ++j) {
        x.col(j).normalize();
    }
    const MintermBasis basis = minterm_basis(x, table);

    for (const std::string &q : enumerate_conjunctive_queries(ds.label_names, 2)) {
        const PropositionAst ast = parse_proposition(q, ds.label_names);
        const auto j = to_dnf(ast, table);

        // ground truth from true label columns, never from scores
        std::set<int> relevant;
        for (Index col = 0; col < ds.labels.sample_count(); ++col) {
            std::vector<std::uint8_t> assignment;
            for (Index row = 0; row < 3; ++row) {
                assignment.push_back(ds.labels.matrix()(row, col) > 0.5 ? 1 : 0);
            }
            if (ast.evaluate(assignment)) {
                relevant.insert(static_cast<int>(col));
            }
        }

        // to_dnf minterm relevance must agree with the truth assignment route
        std::set<int> via_minterms;
        for (int m : j) {
            for (int idx : table.index_sets[static_cast<std::size_t>(m)]) {
                via_minterms.insert(idx);
            }
        }
        CHECK(via_minterms == relevant);

        if (relevant.empty()) {
            continue;
        }
        const RankedResult r = rank_by_query(x, projection_operator(j, basis), q);
        CHECK(average_precision(r, relevant) == doctest::Approx(1.0));
        const int k = 5;
        const double expected_pr =
            std::min(1.0, static_cast<double>(relevant.size()) / static_cast<double>(k));
        CHECK(precision_at_k(r, relevant, k) == doctest::Approx(expected_pr));
    }
}

TEST_CASE("query enumeration counts") {
    const std::vector<std::string> five{"a", "b", "c", "d", "e"};
    // sum_{k=1..5} C(5,k) 2^k = 10 + 40 + 80 + 80 + 32 = 242
    CHECK(enumerate_conjunctive_queries(five, 5).size() == 242);
    CHECK(enumerate_conjunctive_queries(five, 1).size() == 10);
    CHECK(enumerate_conjunctive_queries(five, 2).size() == 50);

    // queries parse in the grammar
    for (const auto &q : enumerate_conjunctive_queries(five, 2)) {
        CHECK_NOTHROW(parse_proposition(q, five));
    }
}
