#include "loopsoup/capacity.hpp"
#include "loopsoup/error.hpp"

#include <doctest.h>

#include <cmath>

using namespace loopsoup;

namespace {
const Complex I{0.0, 1.0};
}

TEST_CASE("hcap of the closed unit half-disk") {
    Estimate e = estimate_hcap(HcapSet::half_disk(1.0), 20.0, 1'000'000, 7, 1);
    CHECK(e.std_error <= 0.02);
    CHECK(std::abs(e.value - 1.0) <= 3.0 * e.std_error);
    CHECK(e.n == 1'000'000);
}

TEST_CASE("hcap scaling and the slit") {
    Estimate quarter = estimate_hcap(HcapSet::half_disk(0.5), 10.0, 200'000, 8, 1);
    CHECK(std::abs(quarter.value - 0.25) <= 3.0 * quarter.std_error);
    Estimate slit = estimate_hcap(HcapSet::vertical_slit(1.0), 20.0, 200'000, 9, 1);
    CHECK(std::abs(slit.value - 0.5) <= 3.0 * slit.std_error);
    // expansion coefficient of sqrt(z^2 + h^2) at infinity is h^2 / 2
    Complex z(0.0, 1e3);
    Complex w = std::sqrt(z * z + 1.0);
    CHECK(((w - z) * z).real() == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(HcapSet::vertical_slit(1.0).exact() == 0.5);
    CHECK(HcapSet::half_disk(0.5).exact() == 0.25);
}

TEST_CASE("hcap is monotone in the set") {
    Estimate small = estimate_hcap(HcapSet::half_disk(0.5), 20.0, 100'000, 10, 1);
    Estimate big = estimate_hcap(HcapSet::half_disk(1.0), 20.0, 100'000, 11, 1);
    Estimate slit = estimate_hcap(HcapSet::vertical_slit(1.0), 20.0, 100'000, 12, 1);
    CHECK(small.value <= big.value + 3.0 * std::hypot(small.std_error, big.std_error));
    CHECK(slit.value <= big.value + 3.0 * std::hypot(slit.std_error, big.std_error));
}

TEST_CASE("hcap is independent of the thread count") {
    Estimate a = estimate_hcap(HcapSet::half_disk(1.0), 20.0, 40'000, 3, 1);
    Estimate b = estimate_hcap(HcapSet::half_disk(1.0), 20.0, 40'000, 3, 4);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("hcap preconditions") {
    CHECK_THROWS_AS(estimate_hcap(HcapSet::half_disk(1.0), 5.0, 1000, 1), Error);
    WalkOptions tight;
    tight.max_steps = 2;
    try {
        estimate_hcap(HcapSet::half_disk(1.0), 20.0, 1000, 1, 1, tight);
        FAIL("budget not enforced");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Budget);
    }
    CHECK_THROWS_AS(HcapSet::from_name("square", 1.0), Error);
}

TEST_CASE("Loewner maps of the vertical slit") {
    VerticalSlit eta;
    CHECK(eta.tip(0.25) == Complex(0.0, 1.0));
    auto [g1, f1] = loewner_maps(1.0);
    CHECK(std::abs(g1.apply(eta.tip(1.0))) < 1e-7);
    Complex v = g1.apply(3.0 * I);
    CHECK(std::abs(v - Complex(0.0, std::sqrt(5.0))) < 1e-14);
    Complex big(1e3, 0.0);
    CHECK(std::abs(g1.apply(big) - big - 2e-3) < 1e-5);
    for (Complex z : {Complex(0.3, 0.2), Complex(-2.0, 1.0), Complex(0.01, 2.5), Complex(5.0, 0.01)})
        CHECK(std::abs(f1.apply(g1.apply(z)) - z) < 1e-9);
    // g_{t+s} = (slit map of the image slit) o g_t
    for (double t : {0.1, 0.7})
        for (double s : {0.05, 1.3}) {
            auto [gt, ft] = loewner_maps(t);
            auto [gts, fts] = loewner_maps(t + s);
            ConformalMap composed = gt.then(Primitive::slit_map(s));
            for (Complex z : {Complex(0.2, 0.5), Complex(-1.0, 3.0), Complex(4.0, 0.1)})
                CHECK(std::abs(composed.apply(z) - gts.apply(z)) < 1e-8);
        }
}

TEST_CASE("slit trace geometry") {
    VerticalSlit eta;
    CHECK(eta.distance_to_trace(Complex(1.0, 0.5), 1.0) == doctest::Approx(1.0));
    CHECK(eta.distance_to_trace(Complex(0.0, 3.0), 1.0) == doctest::Approx(1.0));
    // the segment [-1 + 1.5i, 1 + 1.5i] is first touched when 2 sqrt(r) = 1.5 - delta
    auto c = eta.first_contact(Complex(-1.0, 1.5), Complex(1.0, 1.5), 1e-4, 1.0);
    REQUIRE(c.has_value());
    CHECK(c->r == doctest::Approx(std::pow((1.5 - 1e-4) / 2.0, 2)).epsilon(1e-4));
    CHECK_FALSE(eta.first_contact(Complex(1.0, 0.5), Complex(2.0, 0.5), 1e-4, 1.0).has_value());
}
