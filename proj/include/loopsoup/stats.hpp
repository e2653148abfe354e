#pragma once

#include "loopsoup/io.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace loopsoup {

struct TestReport {
    std::string name;
    std::string statistic_name;
    double statistic = 0.0;
    std::optional<double> p_value;
    std::optional<double> z_score;
    std::vector<std::uint64_t> sample_sizes;
    double level = 0.0; // alpha for p-value tests, sigma bound for z tests, tolerance otherwise
    bool passed = false;
    json config = json::object();
    json detail = json::object();
};

json to_json(const TestReport& r);

// P[K > lambda] for the Kolmogorov distribution.
double kolmogorov_q(double lambda);
// Asymptotic p-value of the KS statistic d with effective sample size n,
// using Stephens' finite-n correction.
double kolmogorov_pvalue(double d, double n);

TestReport ks_test(std::string name, std::vector<double> x, const std::function<double(double)>& cdf, double alpha);
TestReport ks_test(std::string name, std::vector<double> x, std::vector<double> y, double alpha);

// Index of dispersion Var/Mean with z = (D - 1) sqrt((n - 1) / 2); passes if
// the two-sided normal p-value exceeds alpha.
TestReport poisson_dispersion(std::string name, const std::vector<double>& counts, double alpha);

// Pearson chi-square test of independence on an r x c table of counts.
TestReport chi2_independence(std::string name, const std::vector<std::vector<double>>& table, double alpha);

// |observed - expected| <= sigmas * std_error
TestReport z_test(std::string name, double observed, double expected, double std_error, double sigmas,
                  std::uint64_t n = 0);
// |observed / expected - 1| <= tolerance
TestReport relative_test(std::string name, double observed, double expected, double tolerance, std::uint64_t n = 0);

struct Moments {
    double mean;
    double variance; // unbiased
    std::uint64_t n;
    double std_error() const;
};
Moments moments(const std::vector<double>& x);

double normal_two_sided_p(double z);

} // namespace loopsoup
