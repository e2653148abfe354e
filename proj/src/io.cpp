#include "loopsoup/io.hpp"

#include "loopsoup/error.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

namespace loopsoup {

json curve_to_json(const Curve& c) {
    json x = json::array(), y = json::array();
    for (const auto& p : c.points()) {
        x.push_back(p.real());
        y.push_back(p.imag());
    }
    return json{{"t", c.times()}, {"x", std::move(x)}, {"y", std::move(y)}, {"kind", to_string(c.kind())}};
}

Curve curve_from_json(const json& j) {
    try {
        auto t = j.at("t").get<std::vector<double>>();
        auto x = j.at("x").get<std::vector<double>>();
        auto y = j.at("y").get<std::vector<double>>();
        if (x.size() != y.size()) fail(ErrorCode::Io, "curve x and y differ in length");
        std::vector<Complex> p(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) p[i] = {x[i], y[i]};
        CurveKind kind = j.contains("kind") ? curve_kind_from_string(j["kind"].get<std::string>()) : CurveKind::Path;
        return Curve(std::move(t), std::move(p), kind);
    } catch (const json::exception& e) {
        fail(ErrorCode::Io, std::string("malformed curve record: ") + e.what());
    }
}

void write_curve_ndjson(std::ostream& os, const Curve& c) { os << curve_to_json(c).dump() << '\n'; }

std::vector<Curve> read_curves_ndjson(std::istream& is) {
    std::vector<Curve> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorCode::Io, std::string("bad NDJSON line: ") + e.what());
        }
        if (j.contains("t")) out.push_back(curve_from_json(j));
    }
    return out;
}

void write_curves_csv_header(std::ostream& os) { os << "id,t,x,y\n"; }

void write_curve_csv(std::ostream& os, std::size_t id, const Curve& c) {
    char buf[128];
    for (std::size_t i = 0; i < c.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", id, c.times()[i], c.points()[i].real(),
                      c.points()[i].imag());
        os << buf;
    }
}

} // namespace loopsoup
