#include "loopsoup/soups.hpp"

#include "loopsoup/error.hpp"
#include "loopsoup/parallel.hpp"

#include <algorithm>
#include <ostream>

namespace loopsoup {

double LoopSoup::restricted_mass() const {
    if (draws == 0) return 0.0;
    return window_mass() * double(loops.size()) / double(draws);
}

RngStream LoopSoup::loop_stream(std::uint64_t id, std::uint64_t purpose) const {
    return RngStream(seed, stream).child(id).child(purpose);
}

const Domain& LoopSoup::domain() const {
    static const Domain h = Domain::half_plane();
    return sampling.restrict_to ? *sampling.restrict_to : h;
}

LoopSoup sample_loop_soup(double lambda, const Window& w, const LoopSamplingOptions& sampling, const RngStream& rng,
                          int threads) {
    if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "intensity must be positive");
    validate_window(w);
    LoopSoup soup;
    soup.lambda = lambda;
    soup.window = w;
    soup.sampling = sampling;
    soup.seed = rng.seed();
    soup.stream = rng.stream();
    RngStream counter = rng.child(0xC0C0ull);
    soup.draws = counter.poisson(lambda * window_mass(w));
    std::vector<std::optional<Loop>> drawn(soup.draws);
    parallel_for(soup.draws, threads, [&](std::size_t k) {
        RngStream r = rng.child(k);
        RootDraw root = sample_window_root(w, r);
        drawn[k] = sample_window_loop(root, sampling, r);
    });
    for (std::uint64_t k = 0; k < soup.draws; ++k)
        if (drawn[k]) soup.loops.push_back({k, UnrootedLoop(*drawn[k])});
    return soup;
}

RestrictionSplit split_restriction(const LoopSoup& s, const Domain& d) {
    RestrictionSplit out{s, {}};
    out.inside.loops.clear();
    out.inside.sampling.restrict_to = d;
    for (const auto& item : s.loops) {
        const Loop& l = item.loop.canonical();
        PathBuffer path{l.times(), l.points()};
        RngStream r = s.loop_stream(item.id, 0x5E11ull);
        if (stays_inside(path, d, r)) out.inside.loops.push_back(item);
        else out.crossing.push_back(item);
    }
    return out;
}

BubbleSoup sample_bubble_soup(double lambda, double T, double r_min, const HalfDiskOptions& opt, const RngStream& rng,
                              int threads) {
    if (!(lambda > 0.0) || !(T > 0.0) || !(r_min > 0.0))
        fail(ErrorCode::InvalidArgument, "bubble soup needs lambda, T, r_min > 0");
    BubbleSoup soup;
    soup.lambda = lambda;
    soup.horizon = T;
    soup.r_min = r_min;
    soup.seed = rng.seed();
    RngStream counter = rng.child(0xC0C0ull);
    const std::uint64_t n = counter.poisson(lambda * T / (r_min * r_min));
    std::vector<std::optional<BubbleItem>> items(n);
    parallel_for(n, threads, [&](std::size_t k) {
        RngStream r = rng.child(k);
        double s = T * r.uniform();
        items[k] = BubbleItem{s, sample_bubble(r_min, opt, r)};
    });
    for (auto& it : items) soup.items.push_back(std::move(*it));
    std::stable_sort(soup.items.begin(), soup.items.end(),
                     [](const BubbleItem& a, const BubbleItem& b) { return a.s < b.s; });
    return soup;
}

json window_to_json(const Window& w) {
    json j;
    if (auto b = std::get_if<BoxRegion>(&w.region)) {
        j["kind"] = "box";
        j["box"] = {b->x0, b->y0, b->x1, b->y1};
    } else {
        const auto& s = std::get<StadiumRegion>(w.region);
        j["kind"] = "stadium";
        j["height"] = s.height;
        j["base_radius"] = s.base_radius;
        j["k"] = s.k;
    }
    j["t_min"] = w.t_min;
    j["t_max"] = w.t_max;
    return j;
}

Window window_from_json(const json& j) {
    try {
        Window w{};
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "box") {
            auto b = j.at("box").get<std::vector<double>>();
            if (b.size() != 4) fail(ErrorCode::Config, "window box needs four numbers");
            w.region = BoxRegion{b[0], b[1], b[2], b[3]};
        } else if (kind == "stadium") {
            w.region = StadiumRegion{j.at("height").get<double>(), j.value("base_radius", 0.0), j.at("k").get<double>()};
        } else {
            fail(ErrorCode::Config, "unknown window kind '" + kind + "'");
        }
        w.t_min = j.at("t_min").get<double>();
        w.t_max = j.at("t_max").get<double>();
        return w;
    } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("malformed window: ") + e.what());
    }
}

json domain_to_json(const Domain& d) { return json{{"kind", d.name()}, {"params", d.params()}}; }

namespace {

json soup_header(const LoopSoup& s) {
    json h;
    h["lambda"] = s.lambda;
    h["seed"] = s.seed;
    h["stream"] = s.stream;
    h["window"] = window_to_json(s.window);
    h["r_min"] = nullptr;
    h["version"] = kFormatVersion;
    h["restrict_to"] = s.sampling.restrict_to ? domain_to_json(*s.sampling.restrict_to) : json(nullptr);
    h["base_steps"] = s.sampling.base_steps;
    h["dt_fine"] = s.sampling.focus_distance ? json(s.sampling.dt_fine) : json(nullptr);
    h["draws"] = s.draws;
    h["count"] = s.loops.size();
    return h;
}

} // namespace

void write_soup_ndjson(std::ostream& os, const LoopSoup& s) {
    os << soup_header(s).dump() << '\n';
    for (const auto& item : s.loops) {
        json j = curve_to_json(item.loop.canonical().curve());
        j["id"] = item.id;
        os << j.dump() << '\n';
    }
}

void write_soup_csv(std::ostream& os, const LoopSoup& s) {
    os << "# " << soup_header(s).dump() << '\n';
    write_curves_csv_header(os);
    for (const auto& item : s.loops) write_curve_csv(os, item.id, item.loop.canonical().curve());
}

namespace {

json bubble_header(const BubbleSoup& s) {
    return json{{"lambda", s.lambda}, {"seed", s.seed},       {"T", s.horizon},
                {"r_min", s.r_min},   {"window", nullptr},    {"version", kFormatVersion},
                {"count", s.items.size()}};
}

} // namespace

void write_bubble_soup_ndjson(std::ostream& os, const BubbleSoup& s) {
    os << bubble_header(s).dump() << '\n';
    for (const auto& it : s.items) {
        json j = curve_to_json(it.bubble.curve);
        j["s"] = it.s;
        j["r"] = it.bubble.root_radius;
        j["theta"] = it.bubble.root_angle;
        os << j.dump() << '\n';
    }
}

void write_bubble_soup_csv(std::ostream& os, const BubbleSoup& s) {
    os << "# " << bubble_header(s).dump() << '\n';
    write_curves_csv_header(os);
    for (std::size_t k = 0; k < s.items.size(); ++k) write_curve_csv(os, k, s.items[k].bubble.curve);
}

} // namespace loopsoup
