#include "loopsoup/capacity.hpp"

#include "loopsoup/error.hpp"
#include "loopsoup/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace loopsoup {

HcapSet HcapSet::half_disk(double r) {
    if (!(r > 0.0)) fail(ErrorCode::InvalidArgument, "half-disk radius must be positive");
    return {Kind::HalfDisk, r};
}

HcapSet HcapSet::vertical_slit(double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "slit height must be positive");
    return {Kind::VerticalSlit, h};
}

HcapSet HcapSet::from_name(const std::string& name, double size) {
    if (name == "half-disk") return half_disk(size);
    if (name == "slit") return vertical_slit(size);
    fail(ErrorCode::Config, "unknown hcap set '" + name + "' (half-disk | slit)");
}

double HcapSet::distance(Complex z) const {
    if (kind == Kind::HalfDisk) return std::max(modulus(z) - size, 0.0);
    return distance_to_segment(z, 0.0, Complex(0.0, size));
}

Complex HcapSet::project(Complex z) const {
    if (kind == Kind::HalfDisk) {
        double r = modulus(z);
        return r <= size ? z : z * (size / r);
    }
    return {0.0, std::clamp(z.imag(), 0.0, size)};
}

double HcapSet::exact() const { return kind == Kind::HalfDisk ? size * size : 0.5 * size * size; }

std::string HcapSet::name() const { return kind == Kind::HalfDisk ? "half-disk" : "slit"; }

namespace {

constexpr std::uint64_t kWalksPerTask = 1 << 14;

double one_walk(const HcapSet& a, double y, double eps, std::uint64_t max_steps, RngStream& rng) {
    Complex z(0.0, y);
    for (std::uint64_t k = 0; k < max_steps; ++k) {
        double da = a.distance(z);
        double d = std::min(z.imag(), da);
        if (d < eps) return da <= z.imag() ? a.project(z).imag() : 0.0;
        double phi = 2.0 * std::numbers::pi * rng.uniform();
        z += std::polar(d, phi);
    }
    fail(ErrorCode::Budget, "walk exceeded its step budget");
}

} // namespace

Estimate estimate_hcap(const HcapSet& a, double y, std::uint64_t n, std::uint64_t seed, int threads,
                       const WalkOptions& opt) {
    if (!(y >= 20.0 * a.radius())) fail(ErrorCode::InvalidArgument, "launch height must be >= 20 rad(A)");
    if (n < 2) fail(ErrorCode::InvalidArgument, "need at least two walks");
    const double eps = opt.snap * a.radius();
    const std::uint64_t tasks = (n + kWalksPerTask - 1) / kWalksPerTask;
    std::vector<double> sum(tasks, 0.0), sum2(tasks, 0.0);
    parallel_for(tasks, threads, [&](std::size_t task) {
        RngStream rng(seed, 0x68636170ull + task);
        std::uint64_t begin = task * kWalksPerTask;
        std::uint64_t end = std::min<std::uint64_t>(n, begin + kWalksPerTask);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t i = begin; i < end; ++i) {
            double v = y * one_walk(a, y, eps, opt.max_steps, rng);
            s += v;
            s2 += v * v;
        }
        sum[task] = s;
        sum2[task] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t k = 0; k < tasks; ++k) {
        s += sum[k];
        s2 += sum2[k];
    }
    double mean = s / double(n);
    double var = std::max(0.0, (s2 - double(n) * mean * mean) / double(n - 1));
    return {mean, std::sqrt(var / double(n)), n};
}

Complex VerticalSlit::tip(double t) const { return {0.0, 2.0 * std::sqrt(t)}; }

ConformalMap VerticalSlit::g(double t) const { return ConformalMap().then(Primitive::slit_map(t)); }

ConformalMap VerticalSlit::f(double t) const { return ConformalMap().then(Primitive::inverse_slit_map(t)); }

double VerticalSlit::distance_to_trace(Complex z, double t) const { return distance_to_segment(z, 0.0, tip(t)); }

std::optional<Contact> VerticalSlit::first_contact(Complex a, Complex b, double delta, double T) const {
    // Height at which the delta-capsule around [0, iH] first contains p.
    auto height = [delta](Complex p) {
        double x = p.real();
        if (std::abs(x) > delta) return std::numeric_limits<double>::infinity();
        if (p.imag() < 0.0) return std::abs(p) <= delta ? 0.0 : std::numeric_limits<double>::infinity();
        return std::max(0.0, p.imag() - std::sqrt(delta * delta - x * x));
    };
    // Restrict to the part of the segment inside the strip |Re| <= delta.
    double u0 = 0.0, u1 = 1.0;
    const double dx = b.real() - a.real();
    if (dx == 0.0) {
        if (std::abs(a.real()) > delta) return std::nullopt;
    } else {
        double ua = (-delta - a.real()) / dx, ub = (delta - a.real()) / dx;
        if (ua > ub) std::swap(ua, ub);
        u0 = std::max(u0, ua);
        u1 = std::min(u1, ub);
        if (u0 > u1) return std::nullopt;
    }
    auto at = [&](double u) { return a + u * (b - a); };
    // Height is convex along the segment; golden-section search.
    const double len = std::abs(b - a);
    const double tol = len > 0.0 ? 0.1 * delta / len : 1.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = u0, hi = u1;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double hc = height(at(c)), hd = height(at(d));
    while (hi - lo > tol) {
        if (hc <= hd) {
            hi = d;
            d = c;
            hd = hc;
            c = hi - gr * (hi - lo);
            hc = height(at(c));
        } else {
            lo = c;
            c = d;
            hc = hd;
            d = lo + gr * (hi - lo);
            hd = height(at(d));
        }
    }
    double best_u = 0.5 * (lo + hi);
    double best = height(at(best_u));
    for (double u : {u0, u1, c, d}) {
        double h = height(at(u));
        if (h < best) {
            best = h;
            best_u = u;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    double r = 0.25 * best * best;
    if (r > T) return std::nullopt;
    return Contact{r, at(best_u), Complex(0.0, best)};
}

std::pair<ConformalMap, ConformalMap> loewner_maps(double t) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "capacity time must be positive");
    VerticalSlit s;
    return {s.g(t), s.f(t)};
}

} // namespace loopsoup
