// loopsoup command-line front end; everything goes through the C API.

#include "loopsoup/loopsoup.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace {

using nlohmann::json;

struct Flag {
    const char* name; // as typed, without dashes
    const char* key;  // config key
    const char* help;
};

const std::vector<Flag> kFlags = {
    {"seed", "seed", "master seed"},
    {"threads", "threads", "worker threads (0: all hardware threads)"},
    {"out", "out", "output path"},
    {"format", "format", "ndjson | csv"},
    {"dt", "dt", "finest time step near the focus set"},
    {"n-steps", "n_steps", "coarse samples per loop"},
    {"delta-hit", "delta_hit", "hit tolerance (0: 2 sqrt(dt))"},
    {"lambda", "lambda", "soup intensity"},
    {"t-min", "t_min", "shortest loop duration"},
    {"t-max", "t_max", "longest loop duration"},
    {"box", "box", "window x0,y0,x1,y1"},
    {"r-min", "r_min", "bubble radius threshold"},
    {"rho", "rho", "discovery radius threshold"},
    {"T", "T", "time horizon"},
    {"n", "n", "number of walks"},
    {"soups", "soups", "number of soups"},
    {"suite", "suite", "acceptance suite name or 'all'"},
    {"alpha", "alpha", "family-wise test level"},
    {"scale", "scale", "sample-size multiplier"},
    {"set", "set", "half-disk | slit"},
    {"size", "size", "set size, or SVG width for plot"},
    {"y", "y", "hcap start height (0: 20 * size)"},
    {"input", "input", "NDJSON file of curves"},
    {"hull", "hull", "shade loop hulls (true | false)"},
};

const std::vector<std::pair<const char*, const char*>> kCommands = {
    {"sample-soup", "sample a Brownian loop soup in a box window"},
    {"sample-bubbles", "sample a Poisson soup of bubbles at 0"},
    {"hcap", "estimate half-plane capacity by walk on spheres"},
    {"loop-add", "discover loops along the vertical slit, soup by soup"},
    {"verify", "run the acceptance suite"},
    {"plot", "render NDJSON curves to SVG"},
};

int exit_code(ls_status s) {
    switch (s) {
    case LS_OK: return 0;
    case LS_CONFIG:
    case LS_IO:
    case LS_INVALID_ARGUMENT: return 2;
    default: return 3;
    }
}

int report_error(const std::string& kind, const std::string& message, int code) {
    json e{{"error", kind}, {"message", message}, {"exit_code", code}};
    std::fprintf(stderr, "%s\n", e.dump().c_str());
    return code;
}

int report_status(ls_status s) { return report_error(ls_status_name(s), ls_last_error(), exit_code(s)); }

void print_line(const char* line, void*) {
    std::fputs(line, stdout);
    std::fputc('\n', stdout);
    std::fflush(stdout);
}

struct ConfigHandle {
    ls_config* p = nullptr;
    ~ConfigHandle() { ls_config_free(p); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brownian loop soup sampler and verification harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ls_version()));

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_paths[name], "JSON config file (flags override it)");
        for (const auto& f : kFlags) sub->add_option(std::string("--") + f.name, values[name][f.key], f.help);
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    ConfigHandle cfg;
    if (ls_status s = ls_config_new(command.c_str(), &cfg.p); s != LS_OK) return report_status(s);
    const std::string& path = config_paths[command];
    if (!path.empty())
        if (ls_status s = ls_config_load_file(cfg.p, path.c_str()); s != LS_OK) return report_status(s);
    CLI::App* sub = subs[command];
    for (const auto& f : kFlags) {
        if (sub->count(std::string("--") + f.name) == 0) continue;
        if (ls_status s = ls_config_set(cfg.p, f.key, values[command][f.key].c_str()); s != LS_OK) return report_status(s);
    }

    int passed = 1;
    char* result = nullptr;
    ls_status s = ls_run(cfg.p, print_line, nullptr, &passed, &result);
    if (s != LS_OK) return report_status(s);
    std::string summary = result ? result : "{}";
    ls_string_free(result);
    if (!passed) {
        json r = json::parse(summary);
        json e{{"error", "test_failure"}, {"failed", r.value("failed", json::array())}, {"exit_code", 1}};
        std::fprintf(stderr, "%s\n", e.dump().c_str());
        return 1;
    }
    return 0;
}
