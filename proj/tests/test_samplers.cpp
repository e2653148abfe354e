#include "loopsoup/error.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/rng.hpp"
#include "loopsoup/samplers.hpp"
#include "loopsoup/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

using namespace loopsoup;
using std::numbers::pi;

namespace {

const Complex I{0.0, 1.0};
constexpr double kAlpha = 0.01;

Moments collect(int n, const std::function<double()>& draw) {
    std::vector<double> v(n);
    for (auto& x : v) x = draw();
    return moments(v);
}

} // namespace

TEST_CASE("rng streams") {
    RngStream a(5, 3), b(5, 3), c(5, 4);
    std::vector<std::uint64_t> va, vb, vc;
    for (int i = 0; i < 100; ++i) {
        va.push_back(a.next_u64());
        vb.push_back(b.next_u64());
        vc.push_back(c.next_u64());
    }
    CHECK(va == vb);
    CHECK(va != vc);
    RngStream d(5, 3);
    RngStream child = d.child(7);
    CHECK(d.next_u64() == va[0]); // child() does not consume
    CHECK(child.next_u64() == RngStream(5, 3).child(7).next_u64());
    // uniform in (0, 1) and independent-looking across streams
    double sxy = 0.0;
    RngStream x(9, 0), y(9, 1);
    for (int i = 0; i < 100000; ++i) {
        double u = x.uniform(), v = y.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sxy += (u - 0.5) * (v - 0.5);
    }
    CHECK(std::abs(sxy / 100000 / (1.0 / 12.0)) < 3.0 * 3.0 / std::sqrt(100000.0));
}

TEST_CASE("bridge mass") {
    CHECK(bridge_mass(I, I, 1.0) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-15));
    CHECK(bridge_mass(0.0, 1.0, 1.0) == doctest::Approx(std::exp(-0.5) / (2.0 * pi)).epsilon(1e-15));
    CHECK(bridge_mass(Complex(0.3, 1.0), Complex(-1.0, 2.0), 0.7) ==
          bridge_mass(Complex(-1.0, 2.0), Complex(0.3, 1.0), 0.7));
}

TEST_CASE("bridge marginal and endpoints") {
    RngStream rng(31, 0);
    const Complex z(0.25, 1.0 / 3.0), w(-1.0 / 7.0, 2.0);
    Curve b = sample_bridge(z, w, 0.9, 10, rng);
    CHECK(b.front() == z);
    CHECK(b.back() == w);
    CHECK(b.size() == 11);
    Moments m = collect(100000, [&] { return sample_bridge(0.0, 0.0, 1.0, 2, rng).points()[1].real(); });
    std::vector<double> sq(100000);
    RngStream rng2(31, 1);
    for (auto& v : sq) v = std::pow(sample_bridge(0.0, 0.0, 1.0, 2, rng2).points()[1].real(), 2);
    Moments ms = moments(sq);
    CHECK(std::abs(ms.mean - 0.25) <= 3.0 * ms.std_error());
    CHECK(std::abs(m.mean) <= 3.0 * m.std_error());
}

TEST_CASE("arcsine law for the time of the lowest point") {
    // Free motion on [0, 1] (for a bridge the argmin would be uniform), with
    // the exact minimum drawn on every segment.
    RngStream rng(32, 0);
    const int n = 256;
    std::vector<double> tstar;
    for (int k = 0; k < 20000; ++k) {
        Curve l = sample_brownian_path(0.0, 1.0, n, rng);
        std::size_t best = 0;
        double low = 1e300;
        for (int i = 0; i < n; ++i) {
            double m = bridge_minimum(l.points()[i].imag(), l.points()[i + 1].imag(), 1.0 / n, rng);
            if (m < low) {
                low = m;
                best = i;
            }
        }
        tstar.push_back((double(best) + rng.uniform()) / n);
    }
    TestReport r = ks_test("arcsine", tstar, [](double t) { return 2.0 / pi * std::asin(std::sqrt(t)); }, kAlpha);
    CHECK_MESSAGE(r.passed, *r.p_value);
}

TEST_CASE("lowest point of a unit loop: E[(Y0 - M)^2] = 1/2") {
    RngStream rng(33, 0);
    const int n = 64;
    Moments m = collect(20000, [&] {
        Loop l = sample_loop_rooted(0.0, 1.0, n, rng);
        double y0 = l.points()[0].imag(), mn = y0;
        for (int i = 0; i < n; ++i) mn = std::min(mn, bridge_minimum(l.points()[i].imag(), l.points()[i + 1].imag(), 1.0 / n, rng));
        return (y0 - mn) * (y0 - mn);
    });
    CHECK(std::abs(m.mean - 0.5) <= 3.0 * m.std_error());
}

TEST_CASE("bridge minimum and crossing probability") {
    // P[min < 0] for a one-dimensional bridge from a to b over h is exp(-2ab/h)
    CHECK(bridge_crossing_probability(0.3, 0.5, 0.2) == doctest::Approx(std::exp(-2.0 * 0.3 * 0.5 / 0.2)));
    CHECK(bridge_crossing_probability(0.0, 0.5, 0.2) == doctest::Approx(1.0));
    RngStream rng(34, 0);
    int below = 0;
    const int N = 100000;
    for (int k = 0; k < N; ++k) {
        double m = bridge_minimum(0.3, 0.5, 0.2, rng);
        REQUIRE(m <= 0.3);
        below += m < 0.0;
    }
    double p = std::exp(-1.5);
    CHECK(std::abs(below / double(N) - p) <= 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST_CASE("rooted loops: closure, scaling, unique lowest sample") {
    RngStream rng(35, 0);
    Loop l = sample_loop_rooted(Complex(0.3, 2.0), 0.5, 100, rng);
    CHECK(l.points().front() == l.points().back());
    std::set<double> ims;
    for (std::size_t i = 0; i + 1 < l.size(); ++i) ims.insert(l.points()[i].imag());
    CHECK(ims.size() == l.size() - 1);
    auto excess = [&](double t) {
        return collect(6000, [&] {
            Loop x = sample_loop_rooted(I, t, 256, rng);
            double m = -1e300;
            for (const auto& p : x.points()) m = std::max(m, p.imag());
            return m - 1.0;
        });
    };
    Moments a = excess(1.0), b = excess(4.0);
    CHECK(std::abs(b.mean / a.mean - 2.0) <= 0.1);
}

TEST_CASE("Brownian scaling of free paths") {
    RngStream rng(36, 0);
    for (double t : {0.25, 4.0}) {
        Moments m = collect(20000, [&] {
            Curve c = sample_brownian_path(I, t, 8, rng);
            return std::norm(c.back() - I) / t;
        });
        CHECK(std::abs(m.mean - 2.0) < 0.05 * 2.0);
    }
}

TEST_CASE("half-plane excursion") {
    RngStream rng(37, 0);
    StepPolicy steps;
    std::vector<double> angles;
    for (int k = 0; k < 20000; ++k) {
        Curve e = sample_excursion_halfplane(20.0, steps, rng);
        REQUIRE(e.front() == Complex(0.0));
        for (std::size_t i = 1; i < e.size(); ++i) REQUIRE(e.points()[i].imag() > 0.0);
        REQUIRE(std::abs(e.back()) >= 20.0);
        angles.push_back(std::arg(e.back()));
    }
    TestReport r = ks_test("exit angle", angles, root_angle_cdf, kAlpha);
    CHECK_MESSAGE(r.passed, *r.p_value);
}

TEST_CASE("half-disk excursion") {
    RngStream rng(38, 0);
    HalfDiskOptions opt;
    for (double theta : {0.3, pi / 2, 2.5}) {
        Curve out = sample_excursion_halfdisk(theta, Direction::Out, opt, rng);
        Curve in = sample_excursion_halfdisk(theta, Direction::In, opt, rng);
        CHECK(out.front() == Complex(0.0));
        CHECK(in.back() == Complex(0.0));
        CHECK(std::abs(out.back() - std::polar(1.0, theta)) < 1e-12);
        CHECK(std::abs(in.front() - std::polar(1.0, theta)) < 1e-12);
        for (const auto& p : out.points()) CHECK(std::abs(p) <= 1.0 + 1e-12);
    }
    // boundary-to-boundary mass 2 sin(theta) / pi as the normal derivative of
    // the exit density at 0
    for (double theta : {0.4, 1.3, 2.9}) {
        double eps = 1e-6;
        CHECK(poisson_kernel_halfdisk(eps * I, theta) / eps == doctest::Approx(2.0 * std::sin(theta) / pi).epsilon(1e-5));
    }
}

TEST_CASE("half-disk excursion occupation stays below 2 area / pi") {
    RngStream rng(39, 0);
    HalfDiskOptions opt;
    opt.steps.kappa = 0.1;
    struct Box {
        double x0, y0, h;
    };
    const std::vector<Box> boxes = {{-0.1, 0.05, 0.2}, {0.3, 0.3, 0.2}, {-0.6, 0.2, 0.2}};
    const int N = 4000;
    std::vector<std::vector<double>> occ(boxes.size(), std::vector<double>(N, 0.0));
    for (int k = 0; k < N; ++k) {
        Curve e = sample_excursion_halfdisk(sample_root_angle(rng), Direction::Out, opt, rng);
        for (std::size_t i = 1; i < e.size(); ++i) {
            double dt = e.times()[i] - e.times()[i - 1];
            Complex mid = 0.5 * (e.points()[i] + e.points()[i - 1]);
            for (std::size_t b = 0; b < boxes.size(); ++b)
                if (mid.real() >= boxes[b].x0 && mid.real() < boxes[b].x0 + boxes[b].h && mid.imag() >= boxes[b].y0 &&
                    mid.imag() < boxes[b].y0 + boxes[b].h)
                    occ[b][k] += dt;
        }
    }
    for (std::size_t b = 0; b < boxes.size(); ++b) {
        Moments m = moments(occ[b]);
        CHECK(m.mean - 2.0 * boxes[b].h * boxes[b].h / pi <= 3.0 * m.std_error());
    }
}

TEST_CASE("bubbles") {
    RngStream rng(40, 0);
    HalfDiskOptions opt;
    opt.horizon = 50.0;
    const int N = 10000;
    int ge2 = 0, esc3 = 0;
    std::vector<double> theta, rad1, rad2;
    for (int k = 0; k < N; ++k) {
        BubbleSample b = sample_bubble(1.0, opt, rng);
        REQUIRE(b.curve.front() == Complex(0.0));
        REQUIRE(b.curve.back() == Complex(0.0));
        double rad = radius(b.curve);
        ge2 += rad >= 2.0;
        esc3 += rad > 3.0;
        theta.push_back(b.root_angle);
        rad1.push_back(2.0 * rad);
        rad2.push_back(radius(sample_bubble(2.0, opt, rng).curve));
    }
    CHECK(std::abs(ge2 / double(N) - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / N));
    CHECK(std::abs(esc3 / double(N) - 1.0 / 9.0) <= 3.0 * std::sqrt((1.0 / 9.0) * (8.0 / 9.0) / N));
    TestReport ra = ks_test("root angle", theta, root_angle_cdf, kAlpha);
    CHECK_MESSAGE(ra.passed, *ra.p_value);
    TestReport rs = ks_test("scaled bubbles", rad1, rad2, kAlpha);
    CHECK_MESSAGE(rs.passed, *rs.p_value);
    // -S(0)/6 of R z / (z^2 + R^2) is R^-2
    CHECK(-halfdisk_uniformizer(3.0).schwarzian(0.0).real() / 6.0 == doctest::Approx(1.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("window mass") {
    Window w{BoxRegion{0.0, 0.0, 1.0, 1.0}, 1.0, std::numeric_limits<double>::infinity()};
    CHECK(window_mass(w) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-15));
    Window w2{BoxRegion{0.0, 0.0, 2.0 * pi, 1.0}, 1.0, 2.0};
    CHECK(window_mass(w2) == doctest::Approx(0.5).epsilon(1e-15));
    Window w3{BoxRegion{0.0, 0.0, 4.0 * pi, 1.0}, 1.0, 2.0};
    CHECK(window_mass(w3) == doctest::Approx(2.0 * window_mass(w2)).epsilon(1e-15));
    // stadium: area of {z in H : dist(z, [0, iL]) < rho(t)} integrated against dt / (2 pi t^2)
    StadiumRegion s{2.0, 0.5, 9.0};
    Window ws{s, 0.01, 100.0};
    auto area = [&](double t) {
        double rho = s.base_radius + std::sqrt(s.k * t);
        return 2.0 * rho * s.height + 0.5 * pi * rho * rho;
    };
    double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double u) {
            double t = std::exp(u);
            return area(t) / (2.0 * pi * t * t) * t;
        },
        std::log(0.01), std::log(100.0), 15, 1e-13);
    CHECK(window_mass(ws) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("windowed loop measure") {
    RngStream rng(41, 0);
    Window unbounded{BoxRegion{0.0, 1.0, 1.0, 2.0}, 0.01, std::numeric_limits<double>::infinity()};
    try {
        sample_loop_measure_window(unbounded, 16, rng);
        FAIL("unbounded window sampled");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WindowUnbounded);
    }
    Window w{BoxRegion{-1.0, 1.0, 1.0, 2.0}, 0.01, 1.0};
    std::vector<double> t;
    for (int k = 0; k < 5000; ++k) {
        MeasureSample s = sample_loop_measure_window(w, 16, rng);
        CHECK(s.weight == 1.0);
        CHECK(s.mass_of_window == doctest::Approx(window_mass(w)));
        t.push_back(s.loop.duration());
    }
    TestReport r = ks_test(
        "duration", t, [](double a) { return (1.0 / 0.01 - 1.0 / a) / (1.0 / 0.01 - 1.0); }, kAlpha);
    CHECK_MESSAGE(r.passed, *r.p_value);
    // restricted draws stay in the domain
    Domain d = Domain::half_disk(3.0);
    for (int k = 0; k < 200; ++k) {
        MeasureSample s = sample_loop_measure_window(w, 16, rng, d);
        for (const auto& p : s.loop.canonical().points()) CHECK(d.contains(p));
        CHECK(s.attempts >= 1);
    }
}

TEST_CASE("refinement keeps the bridge law") {
    RngStream rng(42, 0);
    std::vector<double> mid;
    for (int k = 0; k < 20000; ++k) {
        PathBuffer p{{0.0, 1.0}, {Complex(0.0), Complex(0.0)}};
        RefineSpec spec;
        spec.need = [](Complex, Complex, double) { return true; };
        spec.dt_min = 1.0 / 16.0;
        REQUIRE(refine_path(p, spec, rng));
        REQUIRE(p.t.size() == 17);
        mid.push_back(p.z[8].real());
    }
    std::vector<double> sq;
    for (double v : mid) sq.push_back(v * v);
    Moments m = moments(sq);
    CHECK(std::abs(m.mean - 0.25) <= 3.0 * m.std_error());
}
