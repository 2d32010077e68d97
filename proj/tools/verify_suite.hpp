#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace subspace::verify {

struct CheckResult {
    bool pass = true;
    std::string detail; ///< failure description, empty on pass
};

/// A seeded property check over `trials` random instances. `lemma` names
/// the statement being exercised and is printed when the check fails.
struct Check {
    std::string name;
    std::string lemma;
    std::function<CheckResult(std::uint64_t seed, int trials)> run;
};

const std::vector<Check> &all_checks();

} // namespace subspace::verify
