#include "loopsoup/loopsoup.h"

#include "loopsoup/capacity.hpp"
#include "loopsoup/error.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/run_config.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <ostream>
#include <sstream>
#include <streambuf>
#include <string>

struct ls_config {
    std::string command;
    loopsoup::json file = nullptr;
    loopsoup::json flags = loopsoup::json::object();
};

namespace {

using loopsoup::ErrorCode;
using loopsoup::json;

thread_local std::string g_last_error;

static_assert(LS_CONFIG == static_cast<int>(ErrorCode::Config) + 1, "ls_status mirrors ErrorCode");

ls_status status_of(ErrorCode c) {
    switch (c) {
    case ErrorCode::InvalidArgument: return LS_INVALID_ARGUMENT;
    case ErrorCode::OutOfDomain: return LS_OUT_OF_DOMAIN;
    case ErrorCode::DegenerateDerivative: return LS_DEGENERATE_DERIVATIVE;
    case ErrorCode::NonConvergent: return LS_NON_CONVERGENT;
    case ErrorCode::NonIntegrable: return LS_NON_INTEGRABLE;
    case ErrorCode::EndpointMismatch: return LS_ENDPOINT_MISMATCH;
    case ErrorCode::PointNotOnLoop: return LS_POINT_NOT_ON_LOOP;
    case ErrorCode::DegenerateGrid: return LS_DEGENERATE_GRID;
    case ErrorCode::WindowUnbounded: return LS_WINDOW_UNBOUNDED;
    case ErrorCode::WindowTooSmall: return LS_WINDOW_TOO_SMALL;
    case ErrorCode::Budget: return LS_BUDGET;
    case ErrorCode::TooFewSamples: return LS_TOO_FEW_SAMPLES;
    case ErrorCode::SparseTable: return LS_SPARSE_TABLE;
    case ErrorCode::Io: return LS_IO;
    case ErrorCode::Config: return LS_CONFIG;
    }
    return LS_INTERNAL;
}

template <class F>
ls_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return LS_OK;
    } catch (const loopsoup::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return LS_CONFIG;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return LS_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LS_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return LS_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) loopsoup::fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

// Hands complete lines to the callback as they are written.
class LineBuf : public std::streambuf {
public:
    LineBuf(ls_line_fn fn, void* user) : fn_(fn), user_(user) {}
    ~LineBuf() override {
        if (!line_.empty()) emit();
    }

protected:
    int_type overflow(int_type ch) override {
        if (ch == traits_type::eof()) return traits_type::not_eof(ch);
        if (ch == '\n')
            emit();
        else
            line_.push_back(static_cast<char>(ch));
        return ch;
    }
    std::streamsize xsputn(const char* s, std::streamsize n) override {
        for (std::streamsize i = 0; i < n; ++i) overflow(traits_type::to_int_type(s[i]));
        return n;
    }

private:
    void emit() {
        if (fn_) fn_(line_.c_str(), user_);
        line_.clear();
    }
    ls_line_fn fn_;
    void* user_;
    std::string line_;
};

} // namespace

extern "C" {

const char* ls_version(void) { return "1.0.0"; }

const char* ls_status_name(ls_status s) {
    switch (s) {
    case LS_OK: return "ok";
    case LS_INTERNAL: return "internal";
    default:
        if (s > LS_OK && s < LS_INTERNAL) return loopsoup::to_string(static_cast<ErrorCode>(s - 1));
        return "unknown";
    }
}

const char* ls_last_error(void) { return g_last_error.c_str(); }

void ls_string_free(char* s) { std::free(s); }

ls_status ls_config_new(const char* command, ls_config** out) {
    return guard([&] {
        need(command, "command");
        need(out, "out");
        *out = nullptr;
        loopsoup::default_config(command); // rejects unknown commands
        *out = new ls_config{command};
    });
}

void ls_config_free(ls_config* cfg) { delete cfg; }

ls_status ls_config_load_json(ls_config* cfg, const char* json_text) {
    return guard([&] {
        need(cfg, "config");
        need(json_text, "json");
        json j = json::parse(json_text);
        if (!j.is_object()) loopsoup::fail(ErrorCode::Config, "config must be a JSON object");
        cfg->file = std::move(j);
    });
}

ls_status ls_config_load_file(ls_config* cfg, const char* path) {
    return guard([&] {
        need(cfg, "config");
        need(path, "path");
        std::ifstream in(path, std::ios::binary);
        if (!in) loopsoup::fail(ErrorCode::Io, std::string("cannot open '") + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        json j;
        try {
            j = json::parse(ss.str());
        } catch (const json::exception& e) {
            loopsoup::fail(ErrorCode::Config, std::string(path) + ": " + e.what());
        }
        if (!j.is_object()) loopsoup::fail(ErrorCode::Config, "config must be a JSON object");
        cfg->file = std::move(j);
    });
}

ls_status ls_config_set(ls_config* cfg, const char* key, const char* value) {
    return guard([&] {
        need(cfg, "config");
        need(key, "key");
        need(value, "value");
        cfg->flags[key] = loopsoup::coerce_value(key, value);
    });
}

ls_status ls_config_to_json(const ls_config* cfg, char** out) {
    return guard([&] {
        need(cfg, "config");
        need(out, "out");
        *out = nullptr;
        *out = dup_string(loopsoup::merge_config(cfg->command, cfg->file, cfg->flags).dump());
    });
}

ls_status ls_run(const ls_config* cfg, ls_line_fn on_line, void* user, int* passed, char** result_json) {
    if (result_json) *result_json = nullptr;
    return guard([&] {
        need(cfg, "config");
        json merged = loopsoup::merge_config(cfg->command, cfg->file, cfg->flags);
        LineBuf buf(on_line, user);
        std::ostream os(&buf);
        loopsoup::RunResult r = loopsoup::run_command(merged, os);
        if (passed) *passed = r.passed ? 1 : 0;
        if (result_json) *result_json = dup_string(r.summary.dump());
    });
}

ls_status ls_hcap(const char* set, double size, uint64_t n, uint64_t seed, int threads, double* estimate,
                  double* std_error) {
    return guard([&] {
        need(set, "set");
        need(estimate, "estimate");
        if (!(size > 0.0)) loopsoup::fail(ErrorCode::InvalidArgument, "size must be positive");
        auto a = loopsoup::HcapSet::from_name(set, size);
        auto e = loopsoup::estimate_hcap(a, 20.0 * size, n, seed, threads);
        *estimate = e.value;
        if (std_error) *std_error = e.std_error;
    });
}

ls_status ls_poisson_kernel_halfdisk(double x, double y, double phi, double* out) {
    return guard([&] {
        need(out, "out");
        *out = loopsoup::poisson_kernel_halfdisk(loopsoup::Complex(x, y), phi);
    });
}

ls_status ls_annular_exit_probability(double s, double theta, double r, double phi0, double phi1, double* out) {
    return guard([&] {
        need(out, "out");
        *out = loopsoup::annular_halfdisk_exit_probability(s, theta, r, phi0, phi1).value;
    });
}

} // extern "C"
