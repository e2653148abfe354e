// Runs every acceptance criterion at full scale and prints one line per
// criterion. Exit status is the number of failed criteria (capped at 100).

#include "loopsoup/acceptance.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

using namespace loopsoup;

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    SuiteOptions opt;
    opt.threads = int(std::max(1u, std::thread::hardware_concurrency()));
    std::string suite = "all";
    std::string report;
    app.add_option("--suite", suite, "criterion suite or 'all'");
    app.add_option("--seed", opt.seed, "master seed");
    app.add_option("--threads", opt.threads, "worker threads");
    app.add_option("--scale", opt.scale, "sample-size multiplier");
    app.add_option("--alpha", opt.alpha, "family-wise level");
    app.add_option("--report", report, "write the full JSON reports here");
    CLI11_PARSE(app, argc, argv);

    auto start = std::chrono::steady_clock::now();
    auto results = run_suite(suite, opt, [&](const CriterionResult& c) {
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  [%.0fs]\n", summary_line(c).c_str(), secs);
        for (const auto& r : c.reports)
            if (!r.passed) std::printf("    %s\n", to_json(r).dump().c_str());
        std::fflush(stdout);
    });

    int failed = 0;
    json all = json::array();
    for (const auto& c : results) {
        failed += c.passed ? 0 : 1;
        all.push_back(to_json(c));
    }
    if (!report.empty()) std::ofstream(report) << all.dump(1) << '\n';
    std::printf("%zu criteria, %d passed, %d failed\n", results.size(), int(results.size()) - failed, failed);
    return std::min(failed, 100);
}
