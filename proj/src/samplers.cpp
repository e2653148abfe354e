#include "loopsoup/samplers.hpp"

#include "loopsoup/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace loopsoup {

namespace {
constexpr double kPi = std::numbers::pi;
} // namespace

double bridge_mass(Complex z, Complex w, double t) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "bridge duration must be positive");
    return std::exp(-std::norm(z - w) / (2.0 * t)) / (2.0 * kPi * t);
}

Curve sample_bridge(Complex z, Complex w, double t, int n, RngStream& rng) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "bridge duration must be positive");
    if (n < 2) fail(ErrorCode::InvalidArgument, "bridge needs n >= 2");
    const double dt = t / n;
    const double sd = std::sqrt(dt);
    std::vector<double> times(n + 1);
    std::vector<Complex> walk(n + 1);
    walk[0] = 0.0;
    for (int k = 1; k <= n; ++k) {
        double a = rng.normal();
        double b = rng.normal();
        walk[k] = walk[k - 1] + sd * Complex(a, b);
    }
    const Complex end = walk[n];
    for (int k = 0; k <= n; ++k) {
        double f = double(k) / n;
        times[k] = t * f;
        walk[k] = z + walk[k] + f * (w - z - end);
    }
    walk[0] = z;
    walk[n] = w;
    times[n] = t;
    return Curve(std::move(times), std::move(walk), CurveKind::Bridge);
}

Curve sample_brownian_path(Complex z, double t, int n, RngStream& rng) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "duration must be positive");
    if (n < 1) fail(ErrorCode::InvalidArgument, "need n >= 1");
    const double sd = std::sqrt(t / n);
    std::vector<double> times(n + 1);
    std::vector<Complex> p(n + 1);
    p[0] = z;
    for (int k = 1; k <= n; ++k) {
        double a = rng.normal();
        double b = rng.normal();
        p[k] = p[k - 1] + sd * Complex(a, b);
        times[k] = t * double(k) / n;
    }
    times[n] = t;
    return Curve(std::move(times), std::move(p), CurveKind::Path);
}

Loop sample_loop_rooted(Complex z, double t, int n, RngStream& rng) {
    return Loop(sample_bridge(z, z, t, n, rng));
}

double bridge_minimum(double a, double b, double h, RngStream& rng) {
    double d = b - a;
    return 0.5 * (a + b - std::sqrt(d * d - 2.0 * h * std::log(rng.uniform())));
}

double bridge_crossing_probability(double da, double db, double h) {
    if (da <= 0.0 || db <= 0.0) return 1.0;
    return std::exp(-2.0 * da * db / h);
}

StepPolicy StepPolicy::uniform(double dt) {
    StepPolicy p;
    p.kappa = 1.0;
    p.dt_min = dt;
    p.dt_max = dt;
    p.scale = [](Complex) { return 0.0; };
    return p;
}

double StepPolicy::step(Complex z) const {
    double l = scale ? scale(z) : modulus(z);
    double h = kappa * l;
    return std::clamp(h * h, dt_min, dt_max);
}

namespace {

// Exact transition of (Brownian, Bessel(3)) over time h.
inline Complex excursion_step(Complex z, double h, RngStream& rng) {
    const double s = std::sqrt(h);
    double x = z.real() + s * rng.normal();
    double y1 = z.imag() + s * rng.normal();
    double y2 = s * rng.normal();
    double y3 = s * rng.normal();
    return {x, std::sqrt(y1 * y1 + y2 * y2 + y3 * y3)};
}

} // namespace

Curve sample_excursion_halfplane(double horizon, const StepPolicy& steps, RngStream& rng) {
    if (!(horizon > 0.0)) fail(ErrorCode::InvalidArgument, "horizon must be positive");
    std::vector<double> t{0.0};
    std::vector<Complex> p{Complex(0.0)};
    Complex z = 0.0;
    double now = 0.0;
    while (modulus(z) < horizon) {
        if (t.size() > steps.max_steps) fail(ErrorCode::Budget, "excursion exceeded its step budget");
        double h = steps.step(z);
        z = excursion_step(z, h, rng);
        now += h;
        t.push_back(now);
        p.push_back(z);
    }
    return Curve(std::move(t), std::move(p), CurveKind::Excursion);
}

Curve sample_excursion_halfdisk(double theta, Direction dir, const HalfDiskOptions& opt, RngStream& rng) {
    if (!(theta > 0.0 && theta < kPi)) fail(ErrorCode::InvalidArgument, "angle must lie in (0, pi)");
    const ConformalMap psi = halfplane_to_halfdisk(theta);
    StepPolicy steps = opt.steps;
    if (!steps.scale) {
        // psi is singular at the preimages of the corners -1, 1 and decays
        // like 1/|z|^2 at infinity; elsewhere it varies on scale >= 1/4.
        const double a = -2.0 * std::cos(theta);
        const double z1 = 1.0 / (a - 2.0), z2 = 1.0 / (a + 2.0);
        steps.scale = [z1, z2](Complex z) {
            return std::min({std::max(modulus(z), 0.25), modulus(z - z1), modulus(z - z2)});
        };
    }
    std::vector<double> t{0.0};
    std::vector<Complex> p{Complex(0.0)};
    Complex z = 0.0;
    double w_prev = 1.0; // |psi'(0)|^2
    double now = 0.0;
    double h = 0.0;
    while (modulus(z) < opt.horizon) {
        if (t.size() > steps.max_steps) fail(ErrorCode::Budget, "excursion exceeded its step budget");
        h = steps.step(z);
        z = excursion_step(z, h, rng);
        auto vd = psi.try_value_derivative(z);
        if (!vd) continue; // measure-zero: landed on a corner preimage
        double w = std::norm(vd->second);
        double next = now + 0.5 * h * (w_prev + w);
        if (!(next > now)) continue;
        now = next;
        w_prev = w;
        t.push_back(now);
        p.push_back(vd->first);
    }
    const Complex end = std::polar(1.0, theta);
    now += h * w_prev;
    t.push_back(now);
    p.push_back(end);
    Curve out(std::move(t), std::move(p), CurveKind::Excursion);
    return dir == Direction::Out ? out : reverse(out);
}

double sample_root_angle(RngStream& rng) {
    for (;;) {
        double th = kPi * rng.uniform();
        double s = std::sin(th);
        if (rng.uniform() < s * s) return th;
    }
}

double root_angle_cdf(double theta) {
    theta = std::clamp(theta, 0.0, kPi);
    return (2.0 * theta - std::sin(2.0 * theta)) / (2.0 * kPi);
}

BubbleSample sample_bubble(double r_min, const HalfDiskOptions& opt, RngStream& rng) {
    if (!(r_min > 0.0)) fail(ErrorCode::InvalidArgument, "r_min must be positive");
    const double r = r_min / std::sqrt(rng.uniform());
    const double theta = sample_root_angle(rng);
    Curve out = sample_excursion_halfdisk(theta, Direction::Out, opt, rng);
    Curve back = sample_excursion_halfdisk(theta, Direction::In, opt, rng);
    Curve unit = concat(out, back);
    std::vector<double> t = unit.times();
    std::vector<Complex> p = unit.points();
    for (auto& v : t) v *= r * r;
    for (auto& v : p) v *= r;
    return {Curve(std::move(t), std::move(p), CurveKind::Bubble), r, theta};
}

void validate_window(const Window& w) {
    if (!(w.t_min > 0.0)) fail(ErrorCode::InvalidArgument, "window needs t_min > 0");
    if (!std::isfinite(w.t_max)) fail(ErrorCode::WindowUnbounded, "window needs a finite t_max");
    if (!(w.t_max > w.t_min)) fail(ErrorCode::InvalidArgument, "window needs t_max > t_min");
    if (auto b = std::get_if<BoxRegion>(&w.region)) {
        if (!(b->x1 > b->x0 && b->y1 > b->y0)) fail(ErrorCode::InvalidArgument, "window box must have positive area");
        if (b->y0 < 0.0) fail(ErrorCode::InvalidArgument, "window box must lie in the closed upper half-plane");
    } else {
        const auto& s = std::get<StadiumRegion>(w.region);
        if (!(s.height >= 0.0 && s.base_radius >= 0.0 && s.k > 0.0))
            fail(ErrorCode::InvalidArgument, "stadium needs height, base radius >= 0 and k > 0");
    }
}

namespace {

struct StadiumMix {
    double ma, mb, mc; // masses of the t^-2, t^-3/2, t^-1 components
};

StadiumMix stadium_mix(const StadiumRegion& s, double t0, double t1) {
    const double L = s.height, c = s.base_radius, rk = std::sqrt(s.k);
    const double alpha = (2.0 * L * c + 0.5 * kPi * c * c) / (2.0 * kPi);
    const double beta = (2.0 * L * rk + kPi * c * rk) / (2.0 * kPi);
    const double gamma = s.k / 4.0;
    return {alpha * (1.0 / t0 - 1.0 / t1), 2.0 * beta * (1.0 / std::sqrt(t0) - 1.0 / std::sqrt(t1)),
            gamma * std::log(t1 / t0)};
}

} // namespace

double window_mass(const Window& w) {
    if (!std::isfinite(w.t_max)) {
        if (auto b = std::get_if<BoxRegion>(&w.region))
            return (b->x1 - b->x0) * (b->y1 - b->y0) / w.t_min / (2.0 * kPi);
        fail(ErrorCode::WindowUnbounded, "stadium window needs a finite t_max");
    }
    validate_window(w);
    if (auto b = std::get_if<BoxRegion>(&w.region))
        return (b->x1 - b->x0) * (b->y1 - b->y0) * (1.0 / w.t_min - 1.0 / w.t_max) / (2.0 * kPi);
    auto m = stadium_mix(std::get<StadiumRegion>(w.region), w.t_min, w.t_max);
    return m.ma + m.mb + m.mc;
}

RootDraw sample_window_root(const Window& w, RngStream& rng) {
    const double t0 = w.t_min, t1 = w.t_max;
    if (auto b = std::get_if<BoxRegion>(&w.region)) {
        double inv = 1.0 / t0 - rng.uniform() * (1.0 / t0 - 1.0 / t1);
        double x = b->x0 + (b->x1 - b->x0) * rng.uniform();
        double y = b->y0 + (b->y1 - b->y0) * rng.uniform();
        return {{x, y}, 1.0 / inv};
    }
    const auto& s = std::get<StadiumRegion>(w.region);
    auto m = stadium_mix(s, t0, t1);
    double u = rng.uniform() * (m.ma + m.mb + m.mc);
    double v = rng.uniform();
    double t;
    if (u < m.ma) {
        t = 1.0 / (1.0 / t0 - v * (1.0 / t0 - 1.0 / t1));
    } else if (u < m.ma + m.mb) {
        double q = 1.0 / std::sqrt(t0) - v * (1.0 / std::sqrt(t0) - 1.0 / std::sqrt(t1));
        t = 1.0 / (q * q);
    } else {
        t = t0 * std::pow(t1 / t0, v);
    }
    t = std::clamp(t, t0, t1);
    const double rho = s.base_radius + std::sqrt(s.k * t);
    const double rect = 2.0 * rho * s.height;
    const double cap = 0.5 * kPi * rho * rho;
    Complex z;
    if (rng.uniform() * (rect + cap) < rect) {
        z = {rho * (2.0 * rng.uniform() - 1.0), s.height * rng.uniform()};
    } else {
        double r = rho * std::sqrt(rng.uniform());
        double phi = kPi * rng.uniform();
        z = Complex(0.0, s.height) + std::polar(r, phi);
    }
    return {z, t};
}

namespace {

inline double crossing(const Domain* d, Complex a, Complex b, double dt) {
    return bridge_crossing_probability(d->signed_distance(a), d->signed_distance(b), dt);
}

} // namespace

bool refine_path(PathBuffer& path, const RefineSpec& spec, RngStream& rng) {
    const std::size_t n = path.t.size();
    if (n < 2) return true;
    PathBuffer out;
    out.t.reserve(2 * n);
    out.z.reserve(2 * n);
    struct Seg {
        double ta, tb;
        Complex a, b;
    };
    std::vector<Seg> stack;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        out.t.push_back(path.t[i]);
        out.z.push_back(path.z[i]);
        stack.push_back({path.t[i], path.t[i + 1], path.z[i], path.z[i + 1]});
        while (!stack.empty()) {
            Seg s = stack.back();
            stack.pop_back();
            double dt = s.tb - s.ta;
            if (!(dt > spec.dt_min) || !spec.need(s.a, s.b, dt)) {
                // segment final; its left endpoint is already emitted
                if (s.tb != path.t[i + 1]) {
                    out.t.push_back(s.tb);
                    out.z.push_back(s.b);
                }
                continue;
            }
            const double sd = std::sqrt(dt * 0.25);
            const Complex centre = 0.5 * (s.a + s.b);
            Complex m;
            for (int tries = 0;; ++tries) {
                double gx = rng.normal();
                double gy = rng.normal();
                m = centre + sd * Complex(gx, gy);
                if (!spec.conditioned_inside || tries >= 10000) break;
                const Domain* d = spec.conditioned_inside;
                if (d->signed_distance(m) <= 0.0) continue;
                double keep = (1.0 - crossing(d, s.a, m, 0.5 * dt)) * (1.0 - crossing(d, m, s.b, 0.5 * dt));
                if (rng.uniform() < keep) break;
            }
            if (spec.reject_outside && spec.reject_outside->signed_distance(m) <= 0.0) return false;
            const double tm = s.ta + 0.5 * dt;
            // right half first on the stack so the left half is emitted first
            stack.push_back({tm, s.tb, m, s.b});
            stack.push_back({s.ta, tm, s.a, m});
        }
    }
    out.t.push_back(path.t[n - 1]);
    out.z.push_back(path.z[n - 1]);
    path = std::move(out);
    return true;
}

std::function<bool(Complex, Complex, double)> near_set(std::function<double(Complex)> distance, double sigma) {
    return [distance = std::move(distance), sigma](Complex a, Complex b, double dt) {
        double lower = std::min(distance(a), distance(b)) - 0.5 * modulus(b - a);
        return lower < sigma * std::sqrt(dt);
    };
}

bool stays_inside(const PathBuffer& path, const Domain& d, RngStream& rng) {
    const std::size_t n = path.t.size();
    double da = d.signed_distance(path.z[0]);
    if (da <= 0.0) return false;
    for (std::size_t i = 1; i < n; ++i) {
        double db = d.signed_distance(path.z[i]);
        if (db <= 0.0) return false;
        double p = bridge_crossing_probability(da, db, path.t[i] - path.t[i - 1]);
        if (p > 1e-300 && rng.uniform() < p) return false;
        da = db;
    }
    return true;
}

std::optional<Loop> sample_window_loop(const RootDraw& root, const LoopSamplingOptions& opt, RngStream& rng) {
    const Domain* dom = opt.restrict_to ? &*opt.restrict_to : nullptr;
    if (dom && dom->signed_distance(root.z) <= 0.0) return std::nullopt;
    Loop base = sample_loop_rooted(root.z, root.t, opt.base_steps, rng);
    PathBuffer path{base.times(), base.points()};
    if (dom)
        for (const auto& p : path.z)
            if (dom->signed_distance(p) <= 0.0) return std::nullopt;
    if (opt.focus_distance) {
        RefineSpec spec;
        spec.need = near_set(opt.focus_distance, opt.sigma);
        spec.dt_min = opt.dt_fine;
        spec.reject_outside = dom;
        if (!refine_path(path, spec, rng)) return std::nullopt;
    }
    if (dom && !stays_inside(path, *dom, rng)) return std::nullopt;
    path.z.back() = path.z.front();
    return Loop(Curve(std::move(path.t), std::move(path.z), CurveKind::Loop));
}

MeasureSample sample_loop_measure_window(const Window& w, int n, RngStream& rng,
                                         const std::optional<Domain>& restrict_to) {
    validate_window(w);
    LoopSamplingOptions opt;
    opt.base_steps = n;
    opt.restrict_to = restrict_to;
    const double mass = window_mass(w);
    for (std::uint64_t attempts = 1;; ++attempts) {
        if (attempts > 100'000'000) fail(ErrorCode::Budget, "restricted window rejects every loop");
        RootDraw r = sample_window_root(w, rng);
        auto loop = sample_window_loop(r, opt, rng);
        if (loop) return {UnrootedLoop(*loop), 1.0, mass, attempts};
    }
}

} // namespace loopsoup
