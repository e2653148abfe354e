#include "loopsoup/error.hpp"
#include "loopsoup/loop_adding.hpp"
#include "loopsoup/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace loopsoup;

namespace {

const Complex I{0.0, 1.0};

// Counterclockwise circle sampled at n + 1 points, starting at its lowest point.
Loop circle(Complex c, double radius, int n = 4000, double duration = 1.0) {
    std::vector<double> t(n + 1);
    std::vector<Complex> z(n + 1);
    for (int k = 0; k <= n; ++k) {
        t[k] = duration * k / n;
        z[k] = c + radius * std::polar(1.0, -std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / n);
    }
    z[n] = z[0];
    return Loop(Curve(t, z, CurveKind::Loop));
}

SoupLoop item(const Loop& l, std::uint64_t id = 0) { return {id, UnrootedLoop(l)}; }

double expected_hit(double bottom, double delta) { return std::pow((bottom - delta) / 2.0, 2); }

} // namespace

TEST_CASE("first hit of a circle above the slit") {
    VerticalSlit eta;
    const double delta = 1e-3;
    auto h = first_hit(eta, 1.0, circle(2.0 * I, 0.5), delta);
    REQUIRE(h.has_value());
    CHECK(h->contact.r == doctest::Approx(expected_hit(1.5, delta)).epsilon(1e-4));
    CHECK(std::abs(h->contact.tip - eta.tip(h->contact.r)) < 1e-15);
    CHECK(std::abs(h->contact.point - 1.5 * I) < 1e-2);
    // far to the right of the trace
    CHECK_FALSE(first_hit(eta, 1.0, circle(Complex(2.0, 1.0), 0.5), delta).has_value());
    CHECK_THROWS_AS(first_hit(eta, 1.0, circle(2.0 * I, 0.5), 0.0), Error);
}

TEST_CASE("near-double hits are flagged") {
    VerticalSlit eta;
    const double delta = 0.01;
    // arcs touching the slit from the left at height 1 and from the right at
    // height 1 + delta / 2, joined around the top of the trace
    std::vector<Complex> z = {{-1.0, 1.0}, {-0.99 * delta, 1.0}, {-1.0, 1.2}, {-1.0, 3.0}, {1.0, 3.0},
                              {1.0, 1.0 + 0.5 * delta}, {0.99 * delta, 1.0 + 0.5 * delta}, {1.0, 1.2},
                              {1.0, 4.0}, {-1.0, 4.0}, {-1.0, 1.0}};
    std::vector<double> t(z.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.1 * double(k);
    Loop l(Curve(t, z, CurveKind::Loop));
    auto h = first_hit(eta, 1.0, l, delta);
    REQUIRE(h.has_value());
    CHECK(h->segment <= 1);
    CHECK(h->contact.tip.imag() == doctest::Approx(1.0 - delta * std::sqrt(1.0 - 0.99 * 0.99)).epsilon(1e-3));
    REQUIRE(h->near_double.has_value());
    CHECK(h->near_double->point.real() > 0.0);
    CHECK(std::abs(h->near_double->tip - h->contact.tip) <= delta);

    auto d = discover_loop(eta, 1.0, item(l), Domain::half_plane(), DiscoverOptions{delta}, RngStream(30, 0));
    REQUIRE(d.has_value());
    CHECK(d->near_double_hit);
    CHECK(discovery_to_json(*d)["near_double_hit"] == true);

    // moving the right arc up by two deltas separates the hits
    z[5] = {1.0, 1.0 + 2.0 * delta};
    z[6] = {0.99 * delta, 1.0 + 2.0 * delta};
    auto apart = first_hit(eta, 1.0, Loop(Curve(t, z, CurveKind::Loop)), delta);
    REQUIRE(apart.has_value());
    CHECK_FALSE(apart->near_double.has_value());
    CHECK_FALSE(first_hit(eta, 1.0, circle(2.0 * I, 0.5), 1e-3)->near_double.has_value());
}

TEST_CASE("first hit is monotone in the horizon") {
    VerticalSlit eta;
    const Loop l = circle(2.0 * I, 0.5);
    CHECK_FALSE(first_hit(eta, 0.5, l, 1e-3).has_value());
    auto a = first_hit_time(eta, 0.6, UnrootedLoop(l), 1e-3);
    auto b = first_hit_time(eta, 2.0, UnrootedLoop(l), 1e-3);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(*a == *b);

    RngStream rng(31, 0);
    int hits = 0;
    for (int k = 0; k < 300; ++k) {
        Loop w = sample_loop_rooted(Complex(rng.uniform() - 0.5, 2.0 * rng.uniform()), 0.2, 64, rng);
        auto short_h = first_hit(eta, 0.3, w, 1e-3);
        auto long_h = first_hit(eta, 1.0, w, 1e-3);
        if (short_h) {
            ++hits;
            REQUIRE(long_h.has_value());
            CHECK(long_h->contact.r == doctest::Approx(short_h->contact.r).epsilon(1e-3));
        }
        if (long_h) CHECK(long_h->contact.r <= 1.0);
    }
    CHECK(hits > 0);
}

TEST_CASE("discovered loop and its bubble") {
    VerticalSlit eta;
    DiscoverOptions opt;
    opt.delta_hit = 1e-3;
    const Domain h = Domain::half_plane();
    auto d = discover_loop(eta, 1.0, item(circle(2.0 * I, 0.5), 7), h, opt, RngStream(32, 0));
    REQUIRE(d.has_value());
    CHECK(d->loop_id == 7);
    CHECK(d->loop.root() == eta.tip(d->r));
    CHECK(d->snap <= 2.0 * opt.delta_hit);
    CHECK(d->loop.duration() == doctest::Approx(1.0));
    CHECK(d->bubble.kind() == CurveKind::Bubble);
    CHECK(std::abs(d->bubble.front()) < 1e-6);
    CHECK(std::abs(d->bubble.back()) < 1e-6);
    for (Complex w : d->bubble.points()) CHECK(w.imag() > -1e-6);
    CHECK(d->bubble_radius >= radius(d->bubble) - 1e-12);
    CHECK(d->root_angle > 0.0);
    CHECK(d->root_angle < std::numbers::pi);
    // symmetric circle: the farthest image point is on the imaginary axis
    CHECK(d->root_angle == doctest::Approx(std::numbers::pi / 2).epsilon(1e-2));

    // back through f_r away from the slit
    ConformalMap f = eta.f(d->r);
    const auto& bp = d->bubble.points();
    const auto& lp = d->loop.points();
    for (std::size_t i = 0; i < bp.size(); i += 97)
        if (eta.distance_to_trace(lp[i], d->r) > 0.05) CHECK(std::abs(f.apply(bp[i]) - lp[i]) < 1e-9);

    // a loop already within delta of the origin is found at r = 0
    auto at_origin = discover_loop(eta, 1.0, item(circle(0.6 * I, 0.5)), h, DiscoverOptions{0.2}, RngStream(32, 1));
    REQUIRE(at_origin.has_value());
    CHECK(at_origin->r == 0.0);
    CHECK(at_origin->bubble.front() == Complex(0.0));

    opt.min_radius = 100.0;
    CHECK_FALSE(discover_loop(eta, 1.0, item(circle(2.0 * I, 0.5)), h, opt, RngStream(32, 0)).has_value());
}

TEST_CASE("a second, finer look at the hit") {
    VerticalSlit eta;
    const Domain h = Domain::half_plane();
    DiscoverOptions coarse{0.004};
    DiscoverOptions fine = coarse;
    fine.dt_hit = 6.25e-8; // tolerance 5e-4
    // bottom at 2.003: inside the coarse reach of eta[0, 1], outside the fine one
    Loop above = circle(2.503 * I, 0.5, 4000, 1e-6);
    auto d = discover_loop(eta, 1.0, item(above), h, coarse, RngStream(33, 0));
    REQUIRE(d.has_value());
    CHECK(d->r == doctest::Approx(expected_hit(2.003, 0.004)).epsilon(1e-4));
    CHECK_FALSE(discover_loop(eta, 1.0, item(above), h, fine, RngStream(33, 0)).has_value());

    Loop low = circle(2.0 * I, 0.5, 4000, 1e-6);
    auto f = discover_loop(eta, 1.0, item(low), h, fine, RngStream(33, 1));
    REQUIRE(f.has_value());
    CHECK(f->r == doctest::Approx(expected_hit(1.5, 5e-4)).epsilon(1e-4));
    CHECK(f->snap < 6e-4);
}

TEST_CASE("discoveries of a soup") {
    VerticalSlit eta;
    LoopSamplingOptions o;
    o.base_steps = 32;
    o.restrict_to = Domain::half_plane();
    o.focus_distance = [&eta](Complex z) { return eta.distance_to_trace(z, 0.25); };
    o.dt_fine = 1e-4;
    Window w{BoxRegion{-1.0, 0.0, 1.0, 1.5}, 0.01, 0.5};
    LoopSoup soup = sample_loop_soup(4.0, w, o, RngStream(33, 0));
    DiscoverOptions opt;
    opt.delta_hit = 0.02;
    auto ds = discover(eta, 0.25, soup, opt);
    REQUIRE(ds.size() >= 2);
    for (std::size_t k = 1; k < ds.size(); ++k) {
        CHECK(ds[k - 1].r <= ds[k].r);
        if (ds[k - 1].r == ds[k].r) CHECK(ds[k - 1].loop_id < ds[k].loop_id);
    }
    for (const auto& d : ds) {
        CHECK(d.r <= 0.25);
        CHECK(d.loop.root() == eta.tip(d.r));
        CHECK(std::abs(d.bubble.front()) < 1e-6);
        for (Complex z : d.bubble.points()) CHECK(z.imag() > -opt.delta_hit);
    }
    auto again = discover(eta, 0.25, soup, opt, 3);
    REQUIRE(again.size() == ds.size());
    for (std::size_t k = 0; k < ds.size(); ++k) CHECK(again[k].bubble == ds[k].bubble);
    CHECK(total_loop_time(ds) == doctest::Approx(total_loop_time(eta, 0.25, soup, opt)));

    std::ostringstream os;
    write_discoveries_ndjson(os, json{{"soup", 0}}, ds);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(json::parse(line)["soup"] == 0);
    std::getline(is, line);
    json first = json::parse(line);
    CHECK(first["r_j"] == ds[0].r);
    CHECK(first["loop_id"] == ds[0].loop_id);
    CHECK(first["t_gamma"] == ds[0].loop.duration());
}

TEST_CASE("loop-added path") {
    VerticalSlit eta;
    LoopAddedPath bare = build_loop_added_path(eta, 1.0, {});
    CHECK(bare.total_loop_time() == 0.0);
    CHECK(bare.trace().duration() == doctest::Approx(1.0));
    CHECK(bare.trace().back() == eta.tip(1.0));
    CHECK(bare.jump_times().empty());

    DiscoverOptions opt;
    opt.delta_hit = 1e-3;
    auto d = discover_loop(eta, 1.0, item(circle(2.0 * I, 0.5, 4000, 0.3)), Domain::half_plane(), opt,
                           RngStream(34, 0));
    REQUIRE(d.has_value());
    LoopAddedPath p = build_loop_added_path(eta, 1.0, {*d});
    CHECK(p.total_loop_time() == doctest::Approx(0.3));
    CHECK(p.trace().duration() == doctest::Approx(1.3));
    CHECK(p.S_minus(d->r) == 0.0);
    CHECK(p.S_plus(d->r) == doctest::Approx(0.3));
    CHECK(p.S_minus(0.9) == doctest::Approx(0.3));
    CHECK(p.eta_clock() == 1.0);
    // the path is continuous: no step longer than the trace or loop spacing
    const auto& z = p.trace().points();
    double step = 0.0;
    for (std::size_t i = 1; i < z.size(); ++i) step = std::max(step, std::abs(z[i] - z[i - 1]));
    CHECK(step < 0.2);
    CHECK_THROWS_AS(build_loop_added_path(eta, 1.0, {*d, Discovery{0.1, 1, d->loop, d->bubble, 1, 1, 0, false}}), Error);
    CHECK_THROWS_AS(build_loop_added_path(eta, 0.0, {}), Error);
}

TEST_CASE("total loop time is linear in the intensity") {
    VerticalSlit eta;
    LoopSamplingOptions o;
    o.base_steps = 16;
    o.restrict_to = Domain::half_plane();
    Window w{BoxRegion{-1.0, 0.0, 1.0, 1.5}, 0.01, 0.5};
    DiscoverOptions opt;
    opt.delta_hit = 0.02;
    std::vector<double> one, three;
    for (std::uint64_t i = 0; i < 600; ++i) {
        one.push_back(total_loop_time(eta, 0.25, sample_loop_soup(1.0, w, o, RngStream(35, i)), opt));
        three.push_back(total_loop_time(eta, 0.25, sample_loop_soup(3.0, w, o, RngStream(36, i)), opt) / 3.0);
    }
    Moments a = moments(one), b = moments(three);
    CHECK(a.mean > 0.0);
    CHECK(z_test("per unit intensity", a.mean - b.mean, 0.0, std::hypot(a.std_error(), b.std_error()), 4.0).passed);
}

TEST_CASE("Schwarzian of the slit-to-half-disk maps") {
    // at t = 0 the map is the half-disk uniformizer
    CHECK(slit_halfdisk_schwarzian(1.0, 0.0) == doctest::Approx(-6.0).epsilon(1e-4));
    CHECK(slit_halfdisk_schwarzian(2.0, 0.0) == doctest::Approx(-1.5).epsilon(1e-4));
    // phi_t fixes 0 and maps the slit complement into H
    ConformalMap phi = slit_halfdisk_phi(1.0, 0.04);
    CHECK(std::abs(phi.apply(Complex(0.0, 0.5))) > 0.0);
    CHECK(phi.apply(Complex(0.1, 0.5)).imag() > 0.0);
    CHECK(schwarzian_escape_integral(1.0, 0.0) == 0.0);
    CHECK(schwarzian_escape_integral(1.0, 1e-4) / 1e-4 == doctest::Approx(-6.0).epsilon(1e-2));
    // scale invariance: S scales as R^-2 and the clock as R^2
    CHECK(schwarzian_escape_integral(2.0, 0.4) == doctest::Approx(schwarzian_escape_integral(1.0, 0.1)).epsilon(1e-6));
    // more capacity, more escape
    CHECK(schwarzian_escape_integral(1.0, 0.2) < schwarzian_escape_integral(1.0, 0.1));
    CHECK_THROWS_AS(schwarzian_escape_integral(1.0, 0.25), Error);
    CHECK_THROWS_AS(slit_halfdisk_phi(1.0, 0.3), Error);
}

TEST_CASE("escape checks") {
    RngStream rng(37, 0);
    const Loop inside = circle(0.5 * I, 0.2, 200);
    CHECK_FALSE(loop_escapes(inside, Domain::half_disk(1.0), 1e-4, rng));
    CHECK(loop_escapes(circle(0.8 * I, 0.5, 200), Domain::half_disk(1.0), 1e-4, rng));
    CHECK_FALSE(loop_escapes(circle(0.8 * I, 0.5, 200), Domain::half_plane(), 1e-4, rng));
    CHECK_THROWS_AS(loop_escapes(inside, Domain::rectangle(0, 0, 1, 1), 1e-4, rng), Error);

    LoopAddSetup s;
    s.T = 0.05;
    s.lambda = 0.5;
    s.dt_fine = 1e-3;
    NonEscape whole = non_escape_check(s, std::numeric_limits<double>::infinity(), 3, 38);
    CHECK(whole.frequency == 1.0);
    CHECK(whole.predicted == 1.0);
    s.lambda = 1e-6;
    NonEscape faint = non_escape_check(s, 1.0, 5, 39);
    CHECK(faint.frequency == 1.0);
    CHECK(faint.predicted == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(non_escape_check(s, 0.4, 5, 39), Error);
}

TEST_CASE("loop-add run setup") {
    VerticalSlit eta;
    LoopAddSetup s;
    s.rho = 0.5;
    LoopAddRun run = make_loop_add_run(eta, s);
    const auto& st = std::get<StadiumRegion>(run.window.region);
    CHECK(st.height == doctest::Approx(2.0));
    CHECK(run.window.t_min == doctest::Approx(0.001));
    CHECK(run.window.t_max == doctest::Approx(250.0));
    CHECK(run.discover.delta_hit == doctest::Approx(2.0 * std::sqrt(s.dt_fine)));
    CHECK(run.discover.min_radius == 0.5);
    s.lambda = 0.0;
    CHECK_THROWS_AS(make_loop_add_run(eta, s), Error);
}

TEST_CASE("window sufficiency") {
    VerticalSlit eta;
    LoopAddSetup s;
    s.T = 0.05;
    s.rho = 0.3;
    s.dt_fine = 1e-3;
    s.lambda = 0.5;
    WindowCheck c = check_window_sufficiency(eta, s, 20, 40);
    CHECK(c.soups == 20);
    CHECK(std::abs(c.z) <= 3.0);
    CHECK_THROWS_AS(check_window_sufficiency(eta, s, 1, 40), Error);
    // a stadium covering a fraction of the trace misses most discoveries
    s.window_scale = 0.25;
    s.lambda = 4.0;
    try {
        check_window_sufficiency(eta, s, 40, 41);
        FAIL("tiny window not flagged");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowTooSmall);
    }
}
