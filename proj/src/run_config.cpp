#include "loopsoup/run_config.hpp"

#include "loopsoup/acceptance.hpp"
#include "loopsoup/capacity.hpp"
#include "loopsoup/error.hpp"
#include "loopsoup/loop_adding.hpp"
#include "loopsoup/parallel.hpp"
#include "loopsoup/plot.hpp"
#include "loopsoup/soups.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace loopsoup {

namespace {

enum class Type { Count, Real, Text, Flag, Box };

Type key_type(const std::string& key) {
    static const std::vector<std::pair<std::string, Type>> table = {
        {"seed", Type::Count},    {"threads", Type::Count}, {"n", Type::Count},       {"soups", Type::Count},
        {"n_steps", Type::Count}, {"dt", Type::Real},       {"delta_hit", Type::Real}, {"lambda", Type::Real},
        {"t_min", Type::Real},    {"t_max", Type::Real},    {"r_min", Type::Real},    {"rho", Type::Real},
        {"T", Type::Real},        {"alpha", Type::Real},    {"scale", Type::Real},    {"size", Type::Real},
        {"y", Type::Real},        {"out", Type::Text},      {"format", Type::Text},   {"suite", Type::Text},
        {"set", Type::Text},      {"input", Type::Text},    {"command", Type::Text},  {"hull", Type::Flag},
        {"box", Type::Box}};
    for (const auto& [k, t] : table)
        if (k == key) return t;
    fail(ErrorCode::Config, "unknown config key '" + key + "'");
}

double parse_real(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        fail(ErrorCode::Config, key + ": expected a number, got '" + text + "'");
    return v;
}

// Integers may be written as 1e6; exact up to 2^53 that way, and up to 2^64 - 1
// as plain digits.
std::uint64_t parse_count(const std::string& key, const std::string& text) {
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        errno = 0;
        unsigned long long v = std::strtoull(text.c_str(), nullptr, 10);
        if (errno == ERANGE) fail(ErrorCode::Config, key + ": out of range");
        return v;
    }
    double v = parse_real(key, text);
    if (v < 0.0 || v != std::floor(v) || v > 9007199254740992.0)
        fail(ErrorCode::Config, key + ": expected a non-negative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(v);
}

json common(bool seeded) {
    json j{{"threads", 0}, {"out", ""}};
    if (seeded) j["seed"] = 1;
    return j;
}

std::uint64_t count_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d <= 9007199254740992.0) return static_cast<std::uint64_t>(d);
    }
    fail(ErrorCode::Config, std::string(key) + ": expected a non-negative integer");
}

double real_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_number()) fail(ErrorCode::Config, std::string(key) + ": expected a number");
    return v.get<double>();
}

std::string text_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_string()) fail(ErrorCode::Config, std::string(key) + ": expected a string");
    return v.get<std::string>();
}

void require(bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::Config, what);
}

int threads_of(const json& cfg) {
    std::uint64_t t = count_of(cfg, "threads");
    if (t == 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::min<std::uint64_t>(t, 1024));
}

// Sink for the command's data: the --out file, or the stdout stream.
class DataSink {
public:
    DataSink(const json& cfg, std::ostream& fallback) : path_(text_of(cfg, "out")) {
        if (path_.empty()) {
            os_ = &fallback;
            return;
        }
        file_.open(path_, std::ios::binary);
        if (!file_) fail(ErrorCode::Io, "cannot open '" + path_ + "' for writing");
        os_ = &file_;
    }
    std::ostream& stream() { return *os_; }
    bool to_file() const { return !path_.empty(); }
    void close() {
        if (!to_file()) return;
        file_.close();
        if (!file_) fail(ErrorCode::Io, "write to '" + path_ + "' failed");
    }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* os_ = nullptr;
};

json config_line(const json& cfg) { return json{{"config", cfg}}; }

RunResult cmd_sample_soup(const json& cfg, std::ostream& out) {
    const json& box = cfg.at("box");
    Window w{BoxRegion{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()},
             real_of(cfg, "t_min"), real_of(cfg, "t_max")};
    LoopSamplingOptions opt;
    opt.base_steps = static_cast<int>(count_of(cfg, "n_steps"));
    opt.restrict_to = Domain::half_plane();
    opt.focus_distance = [](Complex z) { return std::abs(z.imag()); };
    opt.dt_fine = real_of(cfg, "dt");
    LoopSoup soup = sample_loop_soup(real_of(cfg, "lambda"), w, opt, RngStream(count_of(cfg, "seed"), 0), threads_of(cfg));

    DataSink sink(cfg, out);
    const bool csv = text_of(cfg, "format") == "csv";
    if (sink.to_file()) sink.stream() << (csv ? "# " : "") << config_line(cfg).dump() << '\n';
    if (csv)
        write_soup_csv(sink.stream(), soup);
    else
        write_soup_ndjson(sink.stream(), soup);
    sink.close();
    return {true, json{{"loops", soup.loops.size()}, {"draws", soup.draws}, {"window_mass", soup.window_mass()}}};
}

RunResult cmd_sample_bubbles(const json& cfg, std::ostream& out) {
    BubbleSoup soup = sample_bubble_soup(real_of(cfg, "lambda"), real_of(cfg, "T"), real_of(cfg, "r_min"), HalfDiskOptions{},
                                         RngStream(count_of(cfg, "seed"), 0), threads_of(cfg));
    DataSink sink(cfg, out);
    const bool csv = text_of(cfg, "format") == "csv";
    if (sink.to_file()) sink.stream() << (csv ? "# " : "") << config_line(cfg).dump() << '\n';
    if (csv)
        write_bubble_soup_csv(sink.stream(), soup);
    else
        write_bubble_soup_ndjson(sink.stream(), soup);
    sink.close();
    return {true, json{{"bubbles", soup.items.size()}}};
}

RunResult cmd_hcap(const json& cfg, std::ostream& out) {
    const double size = real_of(cfg, "size");
    HcapSet set = HcapSet::from_name(text_of(cfg, "set"), size);
    const double y = real_of(cfg, "y") > 0.0 ? real_of(cfg, "y") : 20.0 * size;
    Estimate e = estimate_hcap(set, y, count_of(cfg, "n"), count_of(cfg, "seed"), threads_of(cfg));
    json r{{"set", set.name()}, {"size", size},          {"y", y},
           {"estimate", e.value}, {"std_error", e.std_error}, {"n", e.n}, {"exact", set.exact()}};
    if (!text_of(cfg, "out").empty()) {
        DataSink sink(cfg, out);
        sink.stream() << config_line(cfg).dump() << '\n' << r.dump() << '\n';
        sink.close();
    }
    return {true, r};
}

RunResult cmd_loop_add(const json& cfg, std::ostream& out) {
    VerticalSlit eta;
    LoopAddSetup s;
    s.lambda = real_of(cfg, "lambda");
    s.T = real_of(cfg, "T");
    s.rho = real_of(cfg, "rho");
    s.dt_fine = real_of(cfg, "dt");
    s.t_min = real_of(cfg, "t_min");
    s.t_max = real_of(cfg, "t_max");
    s.base_steps = static_cast<int>(count_of(cfg, "n_steps"));
    LoopAddRun run = make_loop_add_run(eta, s);
    if (real_of(cfg, "delta_hit") > 0.0) run.discover.delta_hit = real_of(cfg, "delta_hit");

    const std::uint64_t soups = count_of(cfg, "soups");
    const std::uint64_t seed = count_of(cfg, "seed");
    std::vector<std::vector<Discovery>> found(soups);
    parallel_for(soups, threads_of(cfg), [&](std::size_t i) { found[i] = run_soup(eta, s, run, seed, i, 1); });

    double sum = 0.0, sum2 = 0.0;
    std::uint64_t doubles = 0;
    for (const auto& f : found) {
        for (const auto& d : f) doubles += d.near_double_hit ? 1 : 0;
        sum += double(f.size());
        sum2 += double(f.size()) * double(f.size());
    }
    const double n = double(soups);
    const double mean = sum / n;
    const double var = soups > 1 ? (sum2 - n * mean * mean) / (n - 1.0) : 0.0;

    if (!text_of(cfg, "out").empty()) {
        DataSink sink(cfg, out);
        std::ostream& os = sink.stream();
        if (text_of(cfg, "format") == "csv") {
            os << "# " << config_line(cfg).dump() << "\nsoup,r_j,loop_id,rad_bubble,t_gamma,root_angle\n";
            for (std::size_t i = 0; i < soups; ++i)
                for (const auto& d : found[i]) {
                    json j = discovery_to_json(d);
                    os << i << ',' << j["r_j"].dump() << ',' << d.loop_id << ',' << j["rad_bubble"].dump() << ','
                       << j["t_gamma"].dump() << ',' << j["root_angle"].dump() << '\n';
                }
        } else {
            os << config_line(cfg).dump() << '\n';
            for (std::size_t i = 0; i < soups; ++i)
                for (const auto& d : found[i]) {
                    json j = discovery_to_json(d);
                    j["soup"] = i;
                    os << j.dump() << '\n';
                }
        }
        sink.close();
    }
    return {true, json{{"soups", soups},
                       {"discoveries", static_cast<std::uint64_t>(sum)},
                       {"mean_count", mean},
                       {"std_error", std::sqrt(var / n)},
                       {"dispersion", mean > 0.0 ? var / mean : 0.0},
                       {"expected_mean", s.lambda * s.T / (s.rho * s.rho)},
                       {"near_double_hits", doubles}}};
}

RunResult cmd_verify(const json& cfg, std::ostream& out) {
    SuiteOptions opt;
    opt.seed = count_of(cfg, "seed");
    opt.threads = threads_of(cfg);
    opt.alpha = real_of(cfg, "alpha");
    opt.scale = real_of(cfg, "scale");
    auto results = run_suite(text_of(cfg, "suite"), opt,
                             [&](const CriterionResult& c) { out << summary_line(c) << '\n' << std::flush; });
    json reports = json::array();
    json failed = json::array();
    bool all = true;
    for (const auto& c : results) {
        reports.push_back(to_json(c));
        if (!c.passed) failed.push_back(c.id);
        all = all && c.passed;
    }
    if (!text_of(cfg, "out").empty()) {
        DataSink sink(cfg, out);
        sink.stream() << json{{"config", cfg}, {"criteria", reports}}.dump(1) << '\n';
        sink.close();
    }
    return {all, json{{"passed", all}, {"criteria", results.size()}, {"failed", failed}}};
}

RunResult cmd_plot(const json& cfg, std::ostream& out) {
    const std::string input = text_of(cfg, "input");
    std::ifstream in(input, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + input + "'");
    std::vector<Curve> curves = read_curves_ndjson(in);
    PlotOptions po;
    po.width = real_of(cfg, "size");
    po.hull = cfg.at("hull").get<bool>();
    std::string svg = render_svg(curves, po);
    DataSink sink(cfg, out);
    sink.stream() << svg;
    sink.close();
    return {true, json{{"curves", curves.size()}}};
}

} // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"sample-soup", "sample-bubbles", "hcap", "loop-add", "verify", "plot"};
    return names;
}

json default_config(const std::string& command) {
    json j;
    if (command == "sample-soup") {
        j = common(true);
        j.update(json{{"lambda", 1.0},
                      {"box", {-1.0, 0.0, 1.0, 2.0}},
                      {"t_min", 0.01},
                      {"t_max", 1.0},
                      {"dt", 1e-4},
                      {"n_steps", 32},
                      {"format", "ndjson"}});
    } else if (command == "sample-bubbles") {
        j = common(true);
        j.update(json{{"lambda", 1.0}, {"T", 1.0}, {"r_min", 1.0}, {"format", "ndjson"}});
    } else if (command == "hcap") {
        j = common(true);
        j.update(json{{"set", "half-disk"}, {"size", 1.0}, {"n", 1000000}, {"y", 0.0}});
    } else if (command == "loop-add") {
        j = common(true);
        // t_min, t_max, delta_hit: 0 picks the run's scale-aware default
        j.update(json{{"lambda", 1.0},
                      {"T", 1.0},
                      {"rho", 1.0},
                      {"soups", 10000},
                      {"dt", 4e-6},
                      {"delta_hit", 0.0},
                      {"t_min", 0.0},
                      {"t_max", 0.0},
                      {"n_steps", 32},
                      {"format", "ndjson"}});
    } else if (command == "verify") {
        j = common(true);
        j.update(json{{"suite", "all"}, {"alpha", 0.01}, {"scale", 1.0}});
    } else if (command == "plot") {
        j = common(false);
        j.update(json{{"input", ""}, {"out", "plot.svg"}, {"hull", false}, {"size", 800.0}});
    } else {
        fail(ErrorCode::Config, "unknown command '" + command + "'");
    }
    j["command"] = command;
    return j;
}

json coerce_value(const std::string& key, const std::string& text) {
    switch (key_type(key)) {
    case Type::Count: return parse_count(key, text);
    case Type::Real: return parse_real(key, text);
    case Type::Text: return text;
    case Type::Flag:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        fail(ErrorCode::Config, key + ": expected true or false");
    case Type::Box: {
        json a = json::array();
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) a.push_back(parse_real(key, part));
        if (a.size() != 4) fail(ErrorCode::Config, "box: expected x0,y0,x1,y1");
        return a;
    }
    }
    fail(ErrorCode::Config, "unreachable");
}

json merge_config(const std::string& command, const json& file, const json& flags) {
    json cfg = default_config(command);
    for (const json* layer : {&file, &flags}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) fail(ErrorCode::Config, "config must be a JSON object");
        for (const auto& [key, value] : layer->items()) {
            if (key == "command") {
                if (value != command) fail(ErrorCode::Config, "config is for command " + value.dump());
                continue;
            }
            if (!cfg.contains(key)) {
                key_type(key); // unknown keys report as such
                fail(ErrorCode::Config, "key '" + key + "' does not apply to " + command);
            }
            cfg[key] = value;
        }
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const json& cfg) {
    require(cfg.is_object() && cfg.contains("command") && cfg["command"].is_string(), "config lacks a command");
    const std::string cmd = cfg["command"].get<std::string>();
    const json defaults = default_config(cmd);
    for (const auto& [key, value] : cfg.items()) {
        require(defaults.contains(key), "key '" + key + "' does not apply to " + cmd);
        switch (key_type(key)) {
        case Type::Count: count_of(cfg, key.c_str()); break;
        case Type::Real: real_of(cfg, key.c_str()); break;
        case Type::Text: text_of(cfg, key.c_str()); break;
        case Type::Flag: require(value.is_boolean(), key + ": expected true or false"); break;
        case Type::Box:
            require(value.is_array() && value.size() == 4 &&
                        std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); }),
                    "box: expected four numbers");
            break;
        }
    }
    for (const auto& [key, value] : defaults.items())
        require(cfg.contains(key), "config lacks '" + key + "'");

    auto positive = [&](const char* k) {
        if (cfg.contains(k)) require(real_of(cfg, k) > 0.0, std::string(k) + " must be positive");
    };
    auto non_negative = [&](const char* k) {
        if (cfg.contains(k)) require(real_of(cfg, k) >= 0.0, std::string(k) + " must be non-negative");
    };
    for (const char* k : {"lambda", "T", "rho", "r_min", "dt", "scale", "size"}) positive(k);
    for (const char* k : {"delta_hit", "t_min", "t_max", "y"}) non_negative(k);
    for (const char* k : {"n", "soups"})
        if (cfg.contains(k)) require(count_of(cfg, k) >= 1, std::string(k) + " must be at least 1");
    if (cfg.contains("n_steps")) require(count_of(cfg, "n_steps") >= 2 && count_of(cfg, "n_steps") <= (1u << 20), "n_steps must be in [2, 2^20]");
    if (cfg.contains("format")) {
        const std::string f = text_of(cfg, "format");
        require(f == "ndjson" || f == "csv", "format must be ndjson or csv");
    }
    if (cfg.contains("alpha")) {
        const double a = real_of(cfg, "alpha");
        require(a > 0.0 && a < 1.0, "alpha must be in (0, 1)");
    }
    if (cfg.contains("suite")) require(is_suite(text_of(cfg, "suite")), "unknown suite '" + text_of(cfg, "suite") + "'");
    if (cfg.contains("set")) {
        const std::string s = text_of(cfg, "set");
        require(s == "half-disk" || s == "slit", "set must be half-disk or slit");
    }
    if (cfg.contains("box")) {
        const json& b = cfg["box"];
        require(b[0].get<double>() < b[2].get<double>() && b[1].get<double>() < b[3].get<double>(),
                "box must satisfy x0 < x1 and y0 < y1");
        require(b[1].get<double>() >= 0.0, "box must lie in the upper half-plane (y0 >= 0)");
    }
    if (cmd == "sample-soup") {
        require(real_of(cfg, "t_min") > 0.0, "t_min must be positive");
        require(real_of(cfg, "t_max") > real_of(cfg, "t_min"), "t_max must exceed t_min");
    }
    if (cmd == "loop-add" && real_of(cfg, "t_min") > 0.0 && real_of(cfg, "t_max") > 0.0)
        require(real_of(cfg, "t_max") > real_of(cfg, "t_min"), "t_max must exceed t_min");
    if (cmd == "plot") {
        require(!text_of(cfg, "input").empty(), "plot needs an input file");
        require(!text_of(cfg, "out").empty(), "plot needs an output file");
    }
}

RunResult run_command(const json& cfg, std::ostream& os) {
    validate_config(cfg);
    os << config_line(cfg).dump() << '\n';
    const std::string cmd = cfg["command"].get<std::string>();
    RunResult r;
    if (cmd == "sample-soup")
        r = cmd_sample_soup(cfg, os);
    else if (cmd == "sample-bubbles")
        r = cmd_sample_bubbles(cfg, os);
    else if (cmd == "hcap")
        r = cmd_hcap(cfg, os);
    else if (cmd == "loop-add")
        r = cmd_loop_add(cfg, os);
    else if (cmd == "verify")
        r = cmd_verify(cfg, os);
    else
        r = cmd_plot(cfg, os);
    os << json{{"result", r.summary}}.dump() << '\n';
    os << std::flush;
    return r;
}

} // namespace loopsoup
