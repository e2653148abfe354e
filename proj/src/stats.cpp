#include "loopsoup/stats.hpp"

#include "loopsoup/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace loopsoup {

namespace {

constexpr std::size_t kMinKs = 100;
constexpr std::size_t kMinDispersion = 1000;

void finite_or_throw(const std::vector<double>& x) {
    for (double v : x)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "sample contains a non-finite value");
}

} // namespace

json to_json(const TestReport& r) {
    json j;
    j["name"] = r.name;
    j["statistic_name"] = r.statistic_name;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value ? json(*r.p_value) : json(nullptr);
    j["z_score"] = r.z_score ? json(*r.z_score) : json(nullptr);
    j["sample_sizes"] = r.sample_sizes;
    j["level"] = r.level;
    j["passed"] = r.passed;
    j["config"] = r.config;
    j["detail"] = r.detail;
    return j;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Jacobi-transformed series, fast for small lambda
        const double pi = std::numbers::pi;
        const double c = pi * pi / (8.0 * lambda * lambda);
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            double m = 2.0 * k - 1.0;
            s += std::exp(-m * m * c);
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double kolmogorov_pvalue(double d, double n) {
    const double rn = std::sqrt(n);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

TestReport ks_test(std::string name, std::vector<double> x, const std::function<double(double)>& cdf, double alpha) {
    if (x.size() < kMinKs) fail(ErrorCode::TooFewSamples, name + ": KS test needs n >= 100");
    finite_or_throw(x);
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = cdf(x[i]);
        d = std::max({d, double(i + 1) / n - f, f - double(i) / n});
    }
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "ks_d";
    r.statistic = d;
    r.p_value = kolmogorov_pvalue(d, n);
    r.sample_sizes = {x.size()};
    r.level = alpha;
    r.passed = *r.p_value > alpha;
    return r;
}

TestReport ks_test(std::string name, std::vector<double> x, std::vector<double> y, double alpha) {
    if (x.size() < kMinKs || y.size() < kMinKs) fail(ErrorCode::TooFewSamples, name + ": KS test needs n >= 100");
    finite_or_throw(x);
    finite_or_throw(y);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = double(x.size()), m = double(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / n - double(j) / m));
    }
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "ks_d";
    r.statistic = d;
    r.p_value = kolmogorov_pvalue(d, n * m / (n + m));
    r.sample_sizes = {x.size(), y.size()};
    r.level = alpha;
    r.passed = *r.p_value > alpha;
    return r;
}

double normal_two_sided_p(double z) {
    static const boost::math::normal_distribution<double> nd;
    return 2.0 * boost::math::cdf(boost::math::complement(nd, std::abs(z)));
}

Moments moments(const std::vector<double>& x) {
    if (x.size() < 2) fail(ErrorCode::TooFewSamples, "need at least two samples");
    finite_or_throw(x);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, ss / double(x.size() - 1), x.size()};
}

double Moments::std_error() const { return std::sqrt(variance / double(n)); }

TestReport poisson_dispersion(std::string name, const std::vector<double>& counts, double alpha) {
    if (counts.size() < kMinDispersion) fail(ErrorCode::TooFewSamples, name + ": dispersion test needs >= 1000 counts");
    finite_or_throw(counts);
    Moments m = moments(counts);
    if (!(m.mean > 0.0)) fail(ErrorCode::InvalidArgument, name + ": counts have zero mean");
    const double disp = m.variance / m.mean;
    const double z = (disp - 1.0) * std::sqrt(0.5 * double(counts.size() - 1));
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "dispersion";
    r.statistic = disp;
    r.z_score = z;
    r.p_value = normal_two_sided_p(z);
    r.sample_sizes = {counts.size()};
    r.level = alpha;
    r.passed = *r.p_value > alpha;
    r.detail = {{"mean", m.mean}, {"variance", m.variance}};
    return r;
}

TestReport chi2_independence(std::string name, const std::vector<std::vector<double>>& table, double alpha) {
    const std::size_t rows = table.size();
    if (rows < 2) fail(ErrorCode::InvalidArgument, name + ": table needs at least two rows");
    const std::size_t cols = table[0].size();
    if (cols < 2) fail(ErrorCode::InvalidArgument, name + ": table needs at least two columns");
    std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (table[i].size() != cols) fail(ErrorCode::InvalidArgument, name + ": ragged table");
        for (std::size_t j = 0; j < cols; ++j) {
            double v = table[i][j];
            if (!(v >= 0.0)) fail(ErrorCode::InvalidArgument, name + ": negative count");
            rs[i] += v;
            cs[j] += v;
            total += v;
        }
    }
    double stat = 0.0;
    double min_expected = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double e = rs[i] * cs[j] / total;
            min_expected = std::min(min_expected, e);
            if (e > 0.0) stat += (table[i][j] - e) * (table[i][j] - e) / e;
        }
    if (!(min_expected >= 5.0)) fail(ErrorCode::SparseTable, name + ": an expected cell count is below 5");
    const double df = double((rows - 1) * (cols - 1));
    boost::math::chi_squared_distribution<double> dist(df);
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "chi2";
    r.statistic = stat;
    r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    r.sample_sizes = {std::uint64_t(total)};
    r.level = alpha;
    r.passed = *r.p_value > alpha;
    r.detail = {{"df", df}, {"table", table}};
    return r;
}

TestReport z_test(std::string name, double observed, double expected, double std_error, double sigmas,
                  std::uint64_t n) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "estimate";
    r.statistic = observed;
    double z = std_error > 0.0 ? (observed - expected) / std_error
                               : (observed == expected ? 0.0 : std::numeric_limits<double>::infinity());
    r.z_score = z;
    if (n) r.sample_sizes = {n};
    r.level = sigmas;
    r.passed = std::abs(z) <= sigmas;
    r.detail = {{"expected", expected}, {"std_error", std_error}};
    return r;
}

TestReport relative_test(std::string name, double observed, double expected, double tolerance, std::uint64_t n) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = "ratio";
    r.statistic = observed / expected;
    if (n) r.sample_sizes = {n};
    r.level = tolerance;
    r.passed = std::abs(r.statistic - 1.0) <= tolerance;
    r.detail = {{"observed", observed}, {"expected", expected}};
    return r;
}

} // namespace loopsoup
