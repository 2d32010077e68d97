#pragma once

#include "subspace/lattice.hpp"
#include "subspace/loss.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace subspace {

/// Deterministic multi-label dataset: a seeded choice of observed minterms,
/// each replicated a fixed number of times.
struct SyntheticDataset {
    LabelMatrix labels;
    std::vector<std::string> label_names;
    std::vector<int> minterm_counts; ///< samples per observed minterm
    std::uint64_t seed = 0;
};

/// Selects round(observed_fraction * 2^c) distinct minterms uniformly by
/// seed and replicates each `per_minterm` times. Columns are grouped by
/// minterm in lexicographic order. Requires c <= 12 and
/// observed_fraction in (0, 1]; a selection that rounds to zero minterms
/// raises EmptyDataset.
SyntheticDataset generate_dataset(Index c, int per_minterm, double observed_fraction,
                                  std::uint64_t seed);

/// All n samples ordered by posterior score, descending, ties broken by
/// ascending sample index.
struct RankedResult {
    std::vector<int> indices;
    std::vector<double> scores; ///< aligned with indices, non-increasing
    std::string query;
};

/// Scores every column of x (unit-normalized; NormalizationError otherwise)
/// against the projection operator.
RankedResult rank_by_query(const Matrix &x, const ProjectionOperator &p,
                           std::string query_text = "");

/// |top-k intersect relevant| / k; requires 1 <= k <= n.
double precision_at_k(const RankedResult &r, const std::set<int> &relevant, int k);

/// Mean over the relevant items of the precision at their rank (standard
/// AP over the full ranking). Empty relevant set raises UndefinedMetric.
double average_precision(const RankedResult &r, const std::set<int> &relevant);

/// Every conjunction of 1..max_literals distinct literals, each plain or
/// negated, written in the proposition grammar ("a & !b & c"). For five
/// labels and max_literals = 5 this enumerates all 242 conjunctive queries.
std::vector<std::string> enumerate_conjunctive_queries(const std::vector<std::string> &labels,
                                                       int max_literals);

} // namespace subspace
