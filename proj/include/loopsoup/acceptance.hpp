#pragma once

#include "loopsoup/stats.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace loopsoup {

struct SuiteOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    double alpha = 0.01; // family-wise level, split over kPValueBudget tests
    double scale = 1.0;  // multiplies every sample size (floored per test)
};

// Number of p-value tests in the full suite; each one runs at alpha / budget.
// Sigma- and tolerance-based checks use their own stated bounds.
inline constexpr int kPValueBudget = 21;

struct CriterionResult {
    int id;
    std::string suite;
    std::string title;
    bool passed;
    std::vector<TestReport> reports;
};

// bubble-mass, hcap, lowest-point, excursion-green, poisson-kernel,
// schwarzian-escape, bubble-soup, thinning, loop-time, invariance, all
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);
double per_test_alpha(const SuiteOptions& opt);

// Runs one suite or all of them in order; `done` is called after each
// criterion. Throws Config for an unknown name.
std::vector<CriterionResult> run_suite(const std::string& name, const SuiteOptions& opt,
                                       const std::function<void(const CriterionResult&)>& done = {});

json to_json(const CriterionResult& c);
// "criterion 7 [bubble-soup] FAIL: ..." with the failing report names.
std::string summary_line(const CriterionResult& c);

} // namespace loopsoup
