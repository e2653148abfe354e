#include "loopsoup/curves.hpp"
#include "loopsoup/error.hpp"
#include "loopsoup/io.hpp"
#include "loopsoup/samplers.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace loopsoup;
using std::numbers::pi;

namespace {

const Complex I{0.0, 1.0};

Curve segment(Complex a, Complex b, double t, int n) {
    std::vector<double> ts;
    std::vector<Complex> ps;
    for (int k = 0; k <= n; ++k) {
        ts.push_back(t * k / n);
        ps.push_back(a + (b - a) * (double(k) / n));
    }
    ps.back() = b;
    return Curve(ts, ps);
}

// Counterclockwise circle starting at center + r.
Loop circle(Complex center, double r, int n, double t = 1.0) {
    std::vector<double> ts;
    std::vector<Complex> ps;
    for (int k = 0; k <= n; ++k) {
        ts.push_back(t * k / n);
        ps.push_back(center + std::polar(r, 2.0 * pi * k / n));
    }
    ps.back() = ps.front();
    return Loop(Curve(ts, ps));
}

double max_time_gap(const Curve& a, const Curve& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.times()[i] - b.times()[i]));
    return m;
}

// Cost of an arbitrary monotone coupling of the two sample grids.
double coupling_cost(const Curve& a, const Curve& b, RngStream& rng) {
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    auto cost = [&] {
        worst = std::max(worst, std::abs(a.times()[i] - b.times()[j]) + std::abs(a.points()[i] - b.points()[j]));
    };
    cost();
    while (i + 1 < a.size() || j + 1 < b.size()) {
        int move = int(rng.next_u64() % 3);
        if (i + 1 == a.size()) move = 1;
        if (j + 1 == b.size()) move = 0;
        if (move == 0 || move == 2) ++i;
        if (move == 1 || move == 2) ++j;
        cost();
    }
    return worst;
}

} // namespace

TEST_CASE("curve construction invariants") {
    CHECK_THROWS_AS(Curve({0.0}, {0.0}), Error);
    CHECK_THROWS_AS(Curve({0.1, 1.0}, {0.0, 1.0}), Error);
    CHECK_THROWS_AS(Curve({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), Error);
    CHECK_THROWS_AS(Curve({0.0, 1.0}, {0.0}), Error);
    try {
        Loop l(segment(0.0, 1.0, 1.0, 4));
        FAIL("open curve accepted as loop");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EndpointMismatch);
    }
}

TEST_CASE("concat") {
    Curve a = segment(0.0, I, 1.0, 4);
    Curve b = segment(I, 2.0 + I, 2.0, 5);
    Curve ab = concat(a, b);
    CHECK(ab.duration() == 3.0);
    CHECK(ab.size() == a.size() + b.size() - 1);
    CHECK(ab.back() == b.back());
    CHECK_NOTHROW(Loop(concat(a, reverse(a))));
    try {
        concat(b, a);
        FAIL("mismatched endpoints accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EndpointMismatch);
    }
    Curve c = segment(2.0 + I, 3.0, 0.5, 3);
    CHECK(concat(concat(a, b), c) == concat(a, concat(b, c)));
}

TEST_CASE("bubble assembly from two half-disk excursions") {
    RngStream rng(21, 0);
    HalfDiskOptions opt;
    opt.horizon = 50.0;
    const double theta = 1.1;
    Curve out = sample_excursion_halfdisk(theta, Direction::Out, opt, rng);
    Curve in = sample_excursion_halfdisk(theta, Direction::In, opt, rng);
    CHECK(out.front() == Complex(0.0));
    CHECK(std::abs(out.back() - std::polar(1.0, theta)) < 1e-12);
    REQUIRE(out.back() == in.front());
    Loop bubble(concat(out, in));
    CHECK(bubble.root() == Complex(0.0));
}

TEST_CASE("reverse") {
    Curve s = segment(0.0, 1.0, 1.0, 8);
    Curve r = reverse(s);
    CHECK(r.front() == Complex(1.0));
    CHECK(r.back() == Complex(0.0));
    CHECK(r.duration() == s.duration());
    RngStream rng(22, 0);
    Curve path = sample_brownian_path(0.3, 0.7, 257, rng);
    Curve rr = reverse(reverse(path));
    CHECK(rr.points() == path.points());
    CHECK(max_time_gap(rr, path) <= 4.0 * std::numeric_limits<double>::epsilon());
    // distributes over concat with the order swapped
    Curve a = segment(0.0, I, 1.0, 4), b = segment(I, 2.0, 0.5, 3);
    Curve lhs = reverse(concat(a, b)), rhs = concat(reverse(b), reverse(a));
    CHECK(lhs.points() == rhs.points());
    CHECK(max_time_gap(lhs, rhs) < 1e-15);
}

TEST_CASE("time reversal of bridges swaps the endpoints in law") {
    RngStream rng(23, 0);
    const Complex z(0.0, 1.0), w(1.0, 2.0);
    std::vector<double> fwd, rev;
    for (int k = 0; k < 4000; ++k) {
        Curve b1 = sample_bridge(w, z, 1.0, 16, rng);
        Curve b2 = reverse(sample_bridge(z, w, 1.0, 16, rng));
        fwd.push_back(b1.points()[5].imag());
        rev.push_back(b2.points()[5].imag());
    }
    std::sort(fwd.begin(), fwd.end());
    std::sort(rev.begin(), rev.end());
    double d = 0.0;
    for (std::size_t i = 0, j = 0; i < fwd.size() && j < rev.size();) {
        if (fwd[i] <= rev[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(double(i) - double(j)) / 4000.0);
    }
    CHECK(d < 1.63 * std::sqrt(2.0 / 4000.0)); // KS critical value at 0.01
}

TEST_CASE("conformal image with Brownian time change") {
    RngStream rng(24, 0);
    Curve c = sample_brownian_path(Complex(0.0, 3.0), 1.0, 256, rng);
    Curve scaled = conformal_image(ConformalMap({Primitive::scaling(2.0)}), c);
    CHECK(scaled.duration() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(radius(scaled) == 2.0 * radius(c));
    Curve shifted = conformal_image(ConformalMap({Primitive::translation(Complex(1.0, 0.5))}), c);
    CHECK(shifted.times() == c.times());
}

TEST_CASE("double inversion recovers the clock at first order") {
    ConformalMap inv({Primitive::inversion()});
    auto mean_error = [&](int n) {
        RngStream rng(25, std::uint64_t(n));
        double total = 0.0;
        for (int k = 0; k < 20; ++k) {
            Loop l = sample_loop_rooted(Complex(0.0, 3.0), 0.25, n, rng);
            if (radius(l.curve()) < 1.0) continue;
            Curve back = conformal_image(inv, conformal_image(inv, l.curve()));
            total += std::abs(back.duration() - l.duration()) / l.duration();
            for (std::size_t i = 0; i < back.size(); i += 37)
                CHECK(std::abs(back.points()[i] - l.points()[i]) < 1e-12);
        }
        return total / 20.0;
    };
    double coarse = mean_error(64), fine = mean_error(1024);
    CHECK(coarse < 0.05);
    CHECK(fine < coarse / 4.0);
}

TEST_CASE("conformal image composes") {
    RngStream rng(26, 0);
    ConformalMap f({Primitive::slit_map(0.2)}), g({Primitive::mobius(1.0, 0.5, -0.2, 0.9)});
    Curve c = sample_brownian_path(Complex(0.2, 2.0), 0.05, 4096, rng);
    Curve both = conformal_image(g.then(f), c);
    Curve stepwise = conformal_image(f, conformal_image(g, c));
    CHECK(std::abs(both.duration() - stepwise.duration()) / both.duration() < 1e-3);
    CHECK(std::abs(both.back() - stepwise.back()) < 1e-12);
}

TEST_CASE("curve distance") {
    Curve s = segment(0.0, 1.0, 1.0, 10);
    CHECK(curve_distance(s, s) == 0.0);
    Curve cz({0.0, 1.0}, {Complex(0.0, 1.0), Complex(0.0, 1.0)});
    Curve cw({0.0, 1.0}, {Complex(3.0, 5.0), Complex(3.0, 5.0)});
    CHECK(curve_distance(cz, cw) == doctest::Approx(5.0));
    // same path on twice the clock
    RngStream rng(27, 0);
    Curve p = sample_brownian_path(0.0, 1.0, 40, rng);
    std::vector<double> t2;
    for (double t : p.times()) t2.push_back(2.0 * t);
    Curve p2(t2, p.points());
    double d = curve_distance(p, p2);
    CHECK(d <= 1.0);
    for (int k = 0; k < 2000; ++k) CHECK(d <= coupling_cost(p, p2, rng) + 1e-15);
    // metric axioms on random curves
    Curve q = sample_brownian_path(0.5, 1.0, 30, rng), r = sample_brownian_path(-0.5, 1.5, 25, rng);
    CHECK(curve_distance(p, q) == curve_distance(q, p));
    CHECK(curve_distance(p, r) <= curve_distance(p, q) + curve_distance(q, r) + 1e-12);
}

TEST_CASE("unrooted distance") {
    Loop c1 = circle(0.0, 1.0, 64), c2 = circle(0.0, 2.0, 64);
    UnrootedLoop u1(c1), u2(c2);
    CHECK(unrooted_distance(u1, u1) == 0.0);
    CHECK(unrooted_distance(UnrootedLoop(shift_loop(c1, 32)), u1) < 1e-12);
    CHECK(unrooted_distance(u1, u2) >= 1.0 - 2.0 * pi / 64);
    RngStream rng(28, 0);
    Loop a = sample_loop_rooted(Complex(0.0, 2.0), 1.0, 64, rng);
    Loop b = sample_loop_rooted(Complex(0.3, 2.0), 1.0, 64, rng);
    const double base = unrooted_distance(UnrootedLoop(a), UnrootedLoop(b));
    for (std::size_t k : {1u, 17u, 40u, 63u})
        CHECK(unrooted_distance(UnrootedLoop(shift_loop(a, k)), UnrootedLoop(b)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("canonical representative is idempotent") {
    RngStream rng(29, 0);
    Loop a = sample_loop_rooted(Complex(0.0, 2.0), 1.0, 100, rng);
    UnrootedLoop u(a);
    UnrootedLoop uu(u.canonical());
    CHECK(uu == u);
    CHECK(lowest_imag_index(u.canonical().curve()) == 0);
}

TEST_CASE("reroot conventions") {
    Loop c = circle(Complex(0.0, 2.0), 1.0, 200);
    Loop low = reroot(c, RootRule::LowestImag);
    CHECK(std::abs(low.root() - Complex(0.0, 1.0)) < 1e-12);
    Loop off = circle(Complex(0.7, 2.0), 0.5, 97);
    Loop far = reroot(off, RootRule::MaxAbs);
    for (const auto& p : off.points()) CHECK(std::abs(p) <= std::abs(far.root()));
    CHECK(unrooted_distance(UnrootedLoop(off), UnrootedLoop(far)) < 1e-12);
    CHECK(UnrootedLoop(far).canonical().points() == UnrootedLoop(off).canonical().points());
    Loop at = reroot_at(off, off.points()[40] + 1e-4, 1e-3);
    CHECK(at.root() == off.points()[40]);
    try {
        reroot_at(off, Complex(10.0, 10.0), 1e-3);
        FAIL("far point accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PointNotOnLoop);
    }
}

TEST_CASE("radius") {
    CHECK(radius(circle(0.0, 1.0, 64).curve()) == doctest::Approx(1.0));
    CHECK(radius(segment(0.0, 2.0 * I, 1.0, 3)) == 2.0);
    Curve s = segment(Complex(0.3, 0.4), Complex(-1.0, 2.0), 1.0, 7);
    CHECK(radius(conformal_image(ConformalMap({Primitive::scaling(4.0)}), s)) == 4.0 * radius(s));
}

TEST_CASE("filled hull") {
    Loop c = circle(Complex(0.0, 2.0), 1.0, 2000);
    Hull h = fill_hull(c, 0.01);
    CHECK(std::abs(h.area() / pi - 1.0) < 0.02);
    for (const auto& p : c.points()) CHECK(h.contains(p));
    CHECK(h.contains(Complex(0.0, 2.0)));
    CHECK_FALSE(h.contains(Complex(1.5, 2.0)));

    // figure eight: both lobes filled
    std::vector<double> ts;
    std::vector<Complex> ps;
    const int n = 4000;
    for (int k = 0; k <= n; ++k) {
        double s = 2.0 * pi * k / n;
        ts.push_back(double(k) / n);
        ps.push_back(Complex(std::sin(s), 2.0 + std::sin(s) * std::cos(s)));
    }
    ps.back() = ps.front();
    Loop eight{Curve(ts, ps)};
    Hull he = fill_hull(eight, 0.01);
    CHECK(he.contains(Complex(0.5, 2.1)));
    CHECK(he.contains(Complex(-0.5, 1.9)));
    CHECK_FALSE(he.contains(Complex(0.0, 2.4)));
    // area of the two lobes: 2 * int_0^pi sin^2 s |cos s| ... = 4/3
    CHECK(he.area() == doctest::Approx(4.0 / 3.0).epsilon(0.03));
    Hull half = fill_hull(eight, 0.005);
    CHECK(half.area() <= he.area() + 1e-12);

    try {
        fill_hull(circle(0.0, 1e-3, 16), 0.01);
        FAIL("tiny loop accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateGrid);
    }
}

TEST_CASE("NDJSON round trip is bit-exact") {
    RngStream rng(30, 0);
    Curve c = sample_bridge(Complex(0.1, 0.2), Complex(1.0 / 3.0, std::sqrt(2.0)), 0.7, 100, rng);
    c.set_kind(CurveKind::Bridge);
    std::stringstream ss;
    ss << "{\"header\": 1}\n";
    write_curve_ndjson(ss, c);
    write_curve_ndjson(ss, reverse(c));
    std::vector<Curve> back = read_curves_ndjson(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == c);
    CHECK(back[0].kind() == CurveKind::Bridge);
    CHECK(back[1] == reverse(c));
}
