#include "loopsoup/error.hpp"
#include "loopsoup/soups.hpp"
#include "loopsoup/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

using namespace loopsoup;

namespace {

Window small_box() { return Window{BoxRegion{-0.5, 0.0, 0.5, 1.0}, 0.05, 0.2}; }

LoopSamplingOptions coarse(std::optional<Domain> d = std::nullopt) {
    LoopSamplingOptions o;
    o.base_steps = 8;
    o.restrict_to = std::move(d);
    return o;
}

double bucket(std::size_t n) { return double(std::min<std::size_t>(n, 3)); }

std::vector<std::vector<double>> table_4x4() { return std::vector<std::vector<double>>(4, std::vector<double>(4, 0.0)); }

} // namespace

TEST_CASE("box window mass") {
    Window w = small_box();
    CHECK(window_mass(w) == doctest::Approx(15.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
    LoopSoup s = sample_loop_soup(1.0, w, coarse(), RngStream(1, 0));
    CHECK(s.window_mass() == window_mass(w));
    CHECK(s.restricted_mass() == doctest::Approx(window_mass(w)));
    CHECK_THROWS_AS(sample_loop_soup(0.0, w, coarse(), RngStream(1, 0)), Error);
}

TEST_CASE("soup counts are Poisson") {
    const Window w = small_box();
    const double lambda = 1.5;
    std::vector<double> counts;
    for (std::uint64_t i = 0; i < 1500; ++i)
        counts.push_back(double(sample_loop_soup(lambda, w, coarse(), RngStream(11, i)).loops.size()));
    Moments m = moments(counts);
    CHECK(z_test("mean", m.mean, lambda * window_mass(w), m.std_error(), 4.0).passed);
    CHECK(poisson_dispersion("dispersion", counts, 1e-3).passed);
}

TEST_CASE("loops in disjoint windows are independent") {
    // short and long loops of one soup live in disjoint time windows
    Window w{BoxRegion{-0.5, 0.0, 0.5, 1.0}, 0.05, 0.4};
    auto table = table_4x4();
    for (std::uint64_t i = 0; i < 3000; ++i) {
        LoopSoup s = sample_loop_soup(1.0, w, coarse(), RngStream(12, i));
        std::size_t shorter = 0, longer = 0;
        for (const auto& l : s.loops) (l.loop.duration() < 0.1 ? shorter : longer)++;
        table[std::size_t(bucket(shorter))][std::size_t(bucket(longer))] += 1.0;
    }
    CHECK(chi2_independence("short vs long", table, 1e-3).passed);
}

TEST_CASE("superposition and thinning") {
    const Window w = small_box();
    const double m = window_mass(w);
    std::vector<double> sum, thin;
    for (std::uint64_t i = 0; i < 1500; ++i) {
        LoopSoup a = sample_loop_soup(0.5, w, coarse(), RngStream(13, 2 * i));
        LoopSoup b = sample_loop_soup(0.7, w, coarse(), RngStream(13, 2 * i + 1));
        sum.push_back(double(a.loops.size() + b.loops.size()));
        RngStream coin(14, i);
        double kept = 0;
        for (std::size_t k = 0; k < a.loops.size() + b.loops.size(); ++k) kept += coin.uniform() < 0.25 ? 1.0 : 0.0;
        thin.push_back(kept);
    }
    Moments ms = moments(sum), mt = moments(thin);
    CHECK(z_test("sum mean", ms.mean, 1.2 * m, ms.std_error(), 4.0).passed);
    CHECK(poisson_dispersion("sum dispersion", sum, 1e-3).passed);
    CHECK(z_test("thinned mean", mt.mean, 0.3 * m, mt.std_error(), 4.0).passed);
    CHECK(poisson_dispersion("thinned dispersion", thin, 1e-3).passed);
}

TEST_CASE("restricted soups stay in their domain") {
    const Domain h = Domain::half_plane();
    LoopSoup s = sample_loop_soup(3.0, small_box(), coarse(h), RngStream(15, 0));
    REQUIRE(s.draws > 0);
    CHECK(s.loops.size() <= s.draws);
    for (const auto& l : s.loops)
        for (Complex z : l.loop.canonical().points()) CHECK(z.imag() > 0.0);
    // splitting by the domain the soup was sampled in keeps everything
    RestrictionSplit same = split_restriction(s, h);
    CHECK(same.inside.loops.size() == s.loops.size());
    CHECK(same.crossing.empty());

    const Domain rect = Domain::rectangle(-0.6, 0.0, 0.6, 1.1);
    RestrictionSplit split = split_restriction(s, rect);
    std::set<std::uint64_t> ids;
    for (const auto& l : split.inside.loops) {
        ids.insert(l.id);
        for (Complex z : l.loop.canonical().points()) CHECK(rect.contains(z));
    }
    for (const auto& l : split.crossing) ids.insert(l.id);
    CHECK(ids.size() == s.loops.size());
    CHECK(split.inside.sampling.restrict_to->name() == rect.name());
}

TEST_CASE("restriction law") {
    const Domain h = Domain::half_plane();
    const Domain rect = Domain::rectangle(-0.6, 0.0, 0.6, 1.1);
    const Window w = small_box();
    std::vector<double> via_split, direct, dur_split, dur_direct;
    auto table = table_4x4();
    for (std::uint64_t i = 0; i < 2000; ++i) {
        LoopSoup s = sample_loop_soup(1.5, w, coarse(h), RngStream(16, i));
        RestrictionSplit split = split_restriction(s, rect);
        via_split.push_back(double(split.inside.loops.size()));
        for (const auto& l : split.inside.loops) dur_split.push_back(l.loop.duration());
        table[std::size_t(bucket(split.inside.loops.size()))][std::size_t(bucket(split.crossing.size()))] += 1.0;

        LoopSoup d = sample_loop_soup(1.5, w, coarse(rect), RngStream(17, i));
        direct.push_back(double(d.loops.size()));
        for (const auto& l : d.loops) dur_direct.push_back(l.loop.duration());
    }
    Moments a = moments(via_split), b = moments(direct);
    CHECK(z_test("inside mean", a.mean - b.mean, 0.0, std::hypot(a.std_error(), b.std_error()), 4.0).passed);
    CHECK(poisson_dispersion("inside dispersion", via_split, 1e-3).passed);
    CHECK(ks_test("inside durations", dur_split, dur_direct, 1e-3).passed);
    CHECK(chi2_independence("inside vs crossing", table, 1e-3).passed);
}

TEST_CASE("bubble soup") {
    HalfDiskOptions opt;
    std::vector<double> counts, stamps;
    for (std::uint64_t i = 0; i < 400; ++i) {
        BubbleSoup s = sample_bubble_soup(1.0, 1.0, 1.0, opt, RngStream(18, i));
        counts.push_back(double(s.items.size()));
        CHECK(std::is_sorted(s.items.begin(), s.items.end(),
                             [](const BubbleItem& x, const BubbleItem& y) { return x.s < y.s; }));
        for (const auto& it : s.items) {
            stamps.push_back(it.s);
            CHECK(it.bubble.root_radius >= 1.0);
        }
    }
    Moments m = moments(counts);
    CHECK(z_test("count", m.mean, 1.0, m.std_error(), 4.0).passed);
    CHECK(ks_test("stamps", stamps, [](double s) { return std::clamp(s, 0.0, 1.0); }, 1e-3).passed);
    // the count scales as T / r_min^2
    BubbleSoup wide = sample_bubble_soup(1.0, 8.0, 2.0, opt, RngStream(19, 0));
    CHECK(wide.horizon == 8.0);
    CHECK_THROWS_AS(sample_bubble_soup(1.0, 1.0, 0.0, opt, RngStream(19, 0)), Error);
}

TEST_CASE("soup NDJSON") {
    LoopSoup s = sample_loop_soup(3.0, small_box(), coarse(Domain::half_plane()), RngStream(20, 4));
    std::ostringstream os;
    write_soup_ndjson(os, s);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    json header = json::parse(line);
    CHECK(header["version"] == kFormatVersion);
    CHECK(header["lambda"] == 3.0);
    CHECK(header["seed"] == 20);
    CHECK(header["stream"] == 4);
    CHECK(header["count"] == s.loops.size());
    CHECK(header["restrict_to"]["kind"] == Domain::half_plane().name());
    Window back = window_from_json(header["window"]);
    CHECK(window_mass(back) == window_mass(s.window));
    std::size_t n = 0;
    while (std::getline(is, line)) {
        json j = json::parse(line);
        Curve c = curve_from_json(j);
        CHECK(c == s.loops[n].loop.canonical().curve());
        CHECK(j["id"] == s.loops[n].id);
        ++n;
    }
    CHECK(n == s.loops.size());
    CHECK_THROWS_AS(window_from_json(json{{"kind", "blob"}, {"t_min", 1}, {"t_max", 2}}), Error);
}

TEST_CASE("soups are reproducible across thread counts") {
    Window w{BoxRegion{-1.0, 0.0, 1.0, 2.0}, 0.01, 1.0};
    LoopSamplingOptions o = coarse(Domain::half_plane());
    o.focus_distance = [](Complex z) { return std::abs(z.imag()); };
    o.dt_fine = 1e-3;
    std::ostringstream a, b;
    write_soup_ndjson(a, sample_loop_soup(1.0, w, o, RngStream(21, 0), 1));
    write_soup_ndjson(b, sample_loop_soup(1.0, w, o, RngStream(21, 0), 3));
    CHECK(a.str() == b.str());
    std::ostringstream c;
    write_soup_ndjson(c, sample_loop_soup(1.0, w, o, RngStream(21, 1), 1));
    CHECK(a.str() != c.str());
}
