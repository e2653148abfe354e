#pragma once

#include "loopsoup/curves.hpp"

#include <json.hpp>

#include <iosfwd>
#include <vector>

namespace loopsoup {

using nlohmann::json;

// {"t": [...], "x": [...], "y": [...], "kind": "..."}; doubles are written in
// shortest round-trip form so reading back is bit-exact.
json curve_to_json(const Curve& c);
Curve curve_from_json(const json& j);

void write_curve_ndjson(std::ostream& os, const Curve& c);
std::vector<Curve> read_curves_ndjson(std::istream& is);

// Rows "id,t,x,y" with a header line.
void write_curves_csv_header(std::ostream& os);
void write_curve_csv(std::ostream& os, std::size_t id, const Curve& c);

} // namespace loopsoup
