#pragma once

#include "loopsoup/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace loopsoup {

// sample-soup, sample-bubbles, hcap, loop-add, verify, plot
const std::vector<std::string>& command_names();

// Every key a command accepts, with its default. "threads": 0 means one
// worker per hardware thread; outputs never depend on it.
json default_config(const std::string& command);

// Parses a flag value given as text into the key's type ("1e6" is a valid
// count, --box takes "x0,y0,x1,y1"). Throws Config.
json coerce_value(const std::string& key, const std::string& text);

// flags > file > defaults. Keys the command does not know are rejected, and
// the result is validated.
json merge_config(const std::string& command, const json& file, const json& flags);
void validate_config(const json& cfg);

struct RunResult {
    bool passed = true; // false only for verify with a failing criterion
    json summary;
};

// Runs cfg["command"]. The merged config is the first line written to
// `stdout_stream`; data goes to cfg["out"] when set and to the stream
// otherwise, preceded in files by the same config line.
RunResult run_command(const json& cfg, std::ostream& stdout_stream);

} // namespace loopsoup
