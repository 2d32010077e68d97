#include "subspace/retrieval.hpp"

#include "subspace/errors.hpp"
#include "subspace/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace subspace {

SyntheticDataset generate_dataset(Index c, int per_minterm, double observed_fraction,
                                  std::uint64_t seed) {
    if (c < 1 || c > 12) {
        throw DimensionError("generate_dataset: c must be in [1, 12], got " +
                             std::to_string(c));
    }
    if (per_minterm < 1) {
        throw ConfigError("generate_dataset: per_minterm must be >= 1");
    }
    if (!(observed_fraction > 0.0) || observed_fraction > 1.0) {
        throw ConfigError("generate_dataset: observed_fraction must be in (0, 1]");
    }
    const std::size_t total = std::size_t{1} << c;
    const std::size_t chosen_count = static_cast<std::size_t>(
        std::llround(observed_fraction * static_cast<double>(total)));
    if (chosen_count == 0) {
        throw EmptyDataset("generate_dataset: observed_fraction " +
                           std::to_string(observed_fraction) + " rounds to zero minterms");
    }

    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + chosen_count);
    std::sort(chosen.begin(), chosen.end()); // lexicographic over the bit patterns

    Matrix y(c, static_cast<Index>(chosen_count) * per_minterm);
    Index col = 0;
    for (std::size_t code : chosen) {
        for (int rep = 0; rep < per_minterm; ++rep, ++col) {
            for (Index r = 0; r < c; ++r) {
                y(r, col) = static_cast<double>((code >> (c - 1 - r)) & 1u);
            }
        }
    }

    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(c));
    for (Index r = 0; r < c; ++r) {
        names.push_back(std::string(1, static_cast<char>('a' + r)));
    }

    return SyntheticDataset{LabelMatrix(std::move(y)), std::move(names),
                            std::vector<int>(chosen_count, per_minterm), seed};
}

RankedResult rank_by_query(const Matrix &x, const ProjectionOperator &p,
                           std::string query_text) {
    RankedResult result;
    result.query = std::move(query_text);
    const Index n = x.cols();
    std::vector<double> raw(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
        raw[static_cast<std::size_t>(j)] = posterior(x.col(j), p);
    }
    result.indices.resize(static_cast<std::size_t>(n));
    std::iota(result.indices.begin(), result.indices.end(), 0);
    std::sort(result.indices.begin(), result.indices.end(), [&](int a, int b) {
        const double sa = raw[static_cast<std::size_t>(a)];
        const double sb = raw[static_cast<std::size_t>(b)];
        return sa != sb ? sa > sb : a < b;
    });
    result.scores.reserve(static_cast<std::size_t>(n));
    for (int idx : result.indices) {
        result.scores.push_back(raw[static_cast<std::size_t>(idx)]);
    }
    return result;
}

double precision_at_k(const RankedResult &r, const std::set<int> &relevant, int k) {
    const int n = static_cast<int>(r.indices.size());
    if (k < 1 || k > n) {
        throw DimensionError("precision_at_k: k must be in [1, " + std::to_string(n) +
                             "], got " + std::to_string(k));
    }
    int hits = 0;
    for (int i = 0; i < k; ++i) {
        if (relevant.count(r.indices[static_cast<std::size_t>(i)]) > 0) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

double average_precision(const RankedResult &r, const std::set<int> &relevant) {
    if (relevant.empty()) {
        throw UndefinedMetric("average_precision: empty relevant set");
    }
    int hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
        if (relevant.count(r.indices[i]) > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

std::vector<std::string> enumerate_conjunctive_queries(const std::vector<std::string> &labels,
                                                       int max_literals) {
    const int c = static_cast<int>(labels.size());
    std::vector<std::string> queries;
    std::vector<int> subset;

    // Subsets in lexicographic order, sign patterns counted in binary with
    // 0 = plain literal.
    auto emit = [&]() {
        const std::size_t k = subset.size();
        for (std::size_t signs = 0; signs < (std::size_t{1} << k); ++signs) {
            std::string q;
            for (std::size_t i = 0; i < k; ++i) {
                if (!q.empty()) {
                    q += " & ";
                }
                if ((signs >> i) & 1u) {
                    q += "!";
                }
                q += labels[static_cast<std::size_t>(subset[i])];
            }
            queries.push_back(std::move(q));
        }
    };

    auto recurse = [&](auto &&self, int start) -> void {
        if (!subset.empty()) {
            emit();
        }
        if (static_cast<int>(subset.size()) == max_literals) {
            return;
        }
        for (int i = start; i < c; ++i) {
            subset.push_back(i);
            self(self, i + 1);
            subset.pop_back();
        }
    };
    recurse(recurse, 0);
    return queries;
}

} // namespace subspace
