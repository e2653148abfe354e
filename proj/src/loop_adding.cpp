#include "loopsoup/loop_adding.hpp"

#include "loopsoup/error.hpp"
#include "loopsoup/parallel.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace loopsoup {

namespace {

// Latest r <= T whose tip is still within dist of eta(r0).
double tip_reach(const CapacityCurve& eta, double r0, double T, double dist) {
    const Complex tip = eta.tip(r0);
    if (std::abs(eta.tip(T) - tip) <= dist) return T;
    double lo = r0, hi = T;
    for (int k = 0; k < 60; ++k) {
        double mid = 0.5 * (lo + hi);
        (std::abs(eta.tip(mid) - tip) <= dist ? lo : hi) = mid;
    }
    return lo;
}

} // namespace

std::optional<Hit> first_hit(const CapacityCurve& eta, double T, const Loop& l, double delta_hit) {
    if (!(delta_hit > 0.0)) fail(ErrorCode::InvalidArgument, "delta_hit must be positive");
    const auto& p = l.points();
    const std::size_t n = p.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = eta.distance_to_trace(p[i], T);
    auto candidate = [&](std::size_t i) { return std::min(d[i], d[i + 1]) - 0.5 * std::abs(p[i + 1] - p[i]) <= delta_hit; };
    std::optional<Hit> best;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!candidate(i)) continue;
        double limit = best ? best->contact.r : T;
        auto c = eta.first_contact(p[i], p[i + 1], delta_hit, limit);
        if (c && (!best || c->r < best->contact.r)) best = Hit{*c, i, std::nullopt};
    }
    if (!best) return best;

    const double lo = tip_reach(eta, best->contact.r, T, delta_hit);
    const std::size_t segs = n - 1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t gap = i > best->segment ? i - best->segment : best->segment - i;
        if (std::min(gap, segs - gap) <= 1 || !candidate(i)) continue;
        auto c = eta.first_contact(p[i], p[i + 1], delta_hit, lo);
        if (c && std::abs(c->point - best->contact.point) > 2.0 * delta_hit) {
            best->near_double = *c;
            break;
        }
    }
    return best;
}

std::optional<double> first_hit_time(const CapacityCurve& eta, double T, const UnrootedLoop& l, double delta_hit) {
    auto h = first_hit(eta, T, l.canonical(), delta_hit);
    if (!h) return std::nullopt;
    return h->contact.r;
}

namespace {

Curve map_to_bubble(const ConformalMap& g, const Loop& l) {
    Curve b = conformal_image(g, l.curve());
    b.set_kind(CurveKind::Bubble);
    return b;
}

} // namespace

std::optional<Discovery> discover_loop(const CapacityCurve& eta, double T, const SoupLoop& item, const Domain& soup_domain,
                                       const DiscoverOptions& opt, RngStream rng) {
    const Loop* lp = &item.loop.canonical();
    double delta = opt.delta_hit;
    auto hit = first_hit(eta, T, *lp, delta);
    if (!hit) return std::nullopt;
    auto far_enough = [&](const std::vector<Complex>& z, double r, double factor) {
        const ConformalMap g = eta.g(r);
        double m2 = 0.0;
        for (const Complex& w : z)
            if (auto v = g.try_value_derivative(w)) m2 = std::max(m2, std::norm(v->first));
        return std::sqrt(m2) >= factor * opt.min_radius;
    };
    std::optional<Loop> fine;
    if (opt.dt_hit > 0.0) {
        if (opt.min_radius > 0.0 && !far_enough(lp->points(), hit->contact.r, 0.8)) return std::nullopt;
        // Refine near eta[0, r_hi] only; segments left coarse cannot touch it.
        // r_hi grows until the finer hit is found or T is reached.
        delta = 2.0 * std::sqrt(opt.dt_hit);
        PathBuffer path{lp->times(), lp->points()};
        const double r0 = hit->contact.r;
        hit.reset();
        for (double reach = 4.0 * opt.delta_hit;; reach *= 4.0) {
            const double r_hi = tip_reach(eta, r0, T, reach);
            RefineSpec spec;
            spec.dt_min = opt.dt_hit;
            spec.conditioned_inside = &soup_domain;
            spec.need = near_set([&](Complex z) { return eta.distance_to_trace(z, r_hi) - delta; }, opt.sigma);
            refine_path(path, spec, rng);
            fine.emplace(Curve(path.t, path.z, CurveKind::Loop));
            hit = first_hit(eta, r_hi, *fine, delta);
            if (hit || r_hi >= T) break;
        }
        if (!hit) return std::nullopt;
        lp = &*fine;
    }
    const Loop& l = *lp;
    const auto& p = l.points();
    const Contact& c = hit->contact;
    std::size_t j = hit->segment;
    if (std::abs(p[j + 1] - c.point) < std::abs(p[j] - c.point)) ++j;
    if (j == p.size() - 1) j = 0;

    Loop shifted = shift_loop(l, j);
    std::vector<double> t = shifted.times();
    std::vector<Complex> z = shifted.points();
    const double snap = std::abs(z.front() - c.tip);
    z.front() = c.tip;
    z.back() = c.tip;

    if (opt.min_radius > 0.0 && !far_enough(z, c.r, 0.9)) return std::nullopt;
    const ConformalMap g = eta.g(c.r);
    Loop rooted(Curve(t, z, CurveKind::Loop));
    Curve bubble = map_to_bubble(g, rooted);
    double rad = radius(bubble);

    if (opt.refine_radius_above > 0.0 && rad >= opt.refine_radius_above) {
        const double keep_off = 4.0 * delta;
        const double target = rad;
        const double sigma = opt.sigma;
        // Upper envelope of |g| over the bridge on [a, b]; nullopt near the trace.
        auto envelope = [&](Complex a, Complex b, double dt) -> std::optional<double> {
            if (eta.distance_to_trace(a, c.r) < keep_off || eta.distance_to_trace(b, c.r) < keep_off)
                return std::nullopt;
            auto va = g.try_value_derivative(a);
            auto vb = g.try_value_derivative(b);
            if (!va || !vb) return std::nullopt;
            double reach = std::max(modulus(va->first), modulus(vb->first));
            double lip = 2.0 * std::max(modulus(va->second), modulus(vb->second));
            return reach + lip * (0.5 * modulus(b - a) + sigma * std::sqrt(dt));
        };
        RefineSpec spec;
        spec.dt_min = opt.dt_radius;
        spec.conditioned_inside = &soup_domain;
        spec.need = [&](Complex a, Complex b, double dt) {
            auto e = envelope(a, b, dt);
            return e && *e > target;
        };
        PathBuffer path{std::move(t), std::move(z)};
        refine_path(path, spec, rng);
        rooted = Loop(Curve(std::move(path.t), std::move(path.z), CurveKind::Loop));
        bubble = map_to_bubble(g, rooted);
        rad = radius(bubble);
        // Maximum of the radial component, a Brownian bridge with rate |g'|^2.
        const auto& lt = rooted.times();
        const auto& lp = rooted.points();
        const auto& bp = bubble.points();
        for (std::size_t i = 0; i + 1 < lp.size(); ++i) {
            double dt = lt[i + 1] - lt[i];
            auto e = envelope(lp[i], lp[i + 1], dt);
            if (!e || *e <= target) continue;
            auto va = g.try_value_derivative(lp[i]);
            auto vb = g.try_value_derivative(lp[i + 1]);
            double s2 = 0.5 * (std::norm(va->second) + std::norm(vb->second));
            double A = modulus(bp[i]), B = modulus(bp[i + 1]);
            double m = -bridge_minimum(-A, -B, s2 * dt, rng);
            rad = std::max(rad, m);
        }
    }
    if (rad < opt.min_radius) return std::nullopt;
    const double angle = std::arg(bubble.points()[max_abs_index(bubble)]);
    return Discovery{c.r, item.id, std::move(rooted), std::move(bubble), rad, angle, snap, hit->near_double.has_value()};
}

std::vector<Discovery> discover(const CapacityCurve& eta, double T, const LoopSoup& soup, const DiscoverOptions& opt,
                                int threads) {
    std::vector<std::optional<Discovery>> found(soup.loops.size());
    const Domain& dom = soup.domain();
    parallel_for(soup.loops.size(), threads, [&](std::size_t k) {
        const SoupLoop& item = soup.loops[k];
        found[k] = discover_loop(eta, T, item, dom, opt, soup.loop_stream(item.id, 0xB0B1ull));
    });
    std::vector<Discovery> out;
    for (auto& f : found)
        if (f) out.push_back(std::move(*f));
    std::sort(out.begin(), out.end(), [](const Discovery& a, const Discovery& b) {
        return a.r != b.r ? a.r < b.r : a.loop_id < b.loop_id;
    });
    return out;
}

LoopAddRun make_loop_add_run(const CapacityCurve& eta, const LoopAddSetup& s) {
    if (!(s.lambda > 0.0) || !(s.T > 0.0) || !(s.rho > 0.0) || !(s.dt_fine > 0.0))
        fail(ErrorCode::InvalidArgument, "loop-add needs lambda, T, rho, dt_fine > 0");
    LoopAddRun run;
    const double height = std::abs(eta.tip(s.T));
    const double rho2 = s.rho * s.rho;
    run.window.region = StadiumRegion{height * s.window_scale, 0.0, s.k * s.window_scale * s.window_scale};
    run.window.t_min = s.t_min > 0.0 ? s.t_min : 0.004 * rho2;
    run.window.t_max = (s.t_max > 0.0 ? s.t_max : 1000.0 * rho2) * s.window_scale;
    validate_window(run.window);
    run.sampling.base_steps = s.base_steps;
    run.sampling.restrict_to = Domain::half_plane();
    const CapacityCurve* curve = &eta;
    const double T = s.T;
    run.sampling.focus_distance = [curve, T](Complex z) { return curve->distance_to_trace(z, T); };
    run.sampling.dt_fine = s.dt_fine;
    run.discover.delta_hit = 2.0 * std::sqrt(s.dt_fine);
    run.discover.dt_radius = 1e-4 * rho2;
    run.discover.refine_radius_above = 0.9 * s.rho;
    run.discover.dt_hit = s.dt_fine / 64.0;
    run.discover.min_radius = s.rho;
    return run;
}

std::vector<Discovery> run_soup(const CapacityCurve& eta, const LoopAddSetup& s, const LoopAddRun& run,
                                std::uint64_t seed, std::uint64_t index, int threads) {
    LoopSoup soup = sample_loop_soup(s.lambda, run.window, run.sampling, RngStream(seed, index), threads);
    std::vector<Discovery> all = discover(eta, s.T, soup, run.discover, threads);
    std::vector<Discovery> out;
    for (auto& d : all)
        if (d.bubble_radius >= s.rho) out.push_back(std::move(d));
    return out;
}

WindowCheck check_window_sufficiency(const CapacityCurve& eta, const LoopAddSetup& s, std::uint64_t soups,
                                     std::uint64_t seed, int threads) {
    if (soups < 2) fail(ErrorCode::InvalidArgument, "window check needs at least two soups");
    LoopAddSetup big = s;
    big.window_scale = 2.0 * s.window_scale;
    const LoopAddRun base = make_loop_add_run(eta, s);
    const LoopAddRun doubled = make_loop_add_run(eta, big);
    auto stats = [&](const LoopAddSetup& set, const LoopAddRun& run, std::uint64_t offset) {
        double sum = 0.0, sum2 = 0.0;
        for (std::uint64_t i = 0; i < soups; ++i) {
            double n = double(run_soup(eta, set, run, seed, offset + i, threads).size());
            sum += n;
            sum2 += n * n;
        }
        double m = sum / double(soups);
        double v = std::max(0.0, (sum2 - double(soups) * m * m) / double(soups - 1));
        return std::pair{m, v};
    };
    auto [m1, v1] = stats(s, base, 0);
    auto [m2, v2] = stats(big, doubled, std::uint64_t(1) << 40);
    double se = std::sqrt((v1 + v2) / double(soups));
    double z = se > 0.0 ? (m2 - m1) / se : (m1 == m2 ? 0.0 : std::numeric_limits<double>::infinity());
    if (std::abs(z) > 3.0)
        fail(ErrorCode::WindowTooSmall, "doubling the window moved the mean discovery count from " +
                                            std::to_string(m1) + " to " + std::to_string(m2));
    return {m1, m2, z, soups};
}

LoopAddedPath::LoopAddedPath(std::vector<double> jump_r, std::vector<double> jump_t, Curve trace, double eta_clock)
    : jump_r_(std::move(jump_r)), jump_t_(std::move(jump_t)), trace_(std::move(trace)), eta_clock_(eta_clock) {
    cumulative_.resize(jump_t_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < jump_t_.size(); ++k) cumulative_[k] = (acc += jump_t_[k]);
}

double LoopAddedPath::S_minus(double r) const {
    auto k = std::lower_bound(jump_r_.begin(), jump_r_.end(), r) - jump_r_.begin();
    return k == 0 ? 0.0 : cumulative_[k - 1];
}

double LoopAddedPath::S_plus(double r) const {
    auto k = std::upper_bound(jump_r_.begin(), jump_r_.end(), r) - jump_r_.begin();
    return k == 0 ? 0.0 : cumulative_[k - 1];
}

double LoopAddedPath::total_loop_time() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

LoopAddedPath build_loop_added_path(const CapacityCurve& eta, double T, const std::vector<Discovery>& discoveries,
                                    double dr) {
    if (!(T > 0.0) || !(dr > 0.0)) fail(ErrorCode::InvalidArgument, "trace needs T > 0 and dr > 0");
    std::vector<double> times{0.0};
    std::vector<Complex> points{eta.tip(0.0)};
    std::vector<double> jr, jt;
    double last_r = 0.0; // capacity time of the last eta sample
    double loops = 0.0;  // loop time so far
    auto eta_to = [&](double r, std::optional<Complex> exact) {
        for (double u = (std::floor(last_r / dr) + 1.0) * dr; u < r; u += dr) {
            times.push_back(u + loops);
            points.push_back(eta.tip(u));
        }
        if (r > last_r) {
            times.push_back(r + loops);
            points.push_back(exact ? *exact : eta.tip(r));
            last_r = r;
        }
    };
    for (const auto& d : discoveries) {
        if (d.r > T) break;
        if (!jr.empty() && d.r < jr.back()) fail(ErrorCode::InvalidArgument, "discoveries must be sorted by r");
        eta_to(d.r, d.loop.root());
        const auto& lt = d.loop.times();
        const auto& lp = d.loop.points();
        const double base = times.back();
        for (std::size_t i = 1; i < lt.size(); ++i) {
            times.push_back(base + lt[i]);
            points.push_back(lp[i]);
        }
        loops += d.loop.duration();
        jr.push_back(d.r);
        jt.push_back(d.loop.duration());
    }
    eta_to(T, std::nullopt);
    return LoopAddedPath(std::move(jr), std::move(jt), Curve(std::move(times), std::move(points), CurveKind::Trace), T);
}

double total_loop_time(const std::vector<Discovery>& discoveries) {
    double s = 0.0;
    for (const auto& d : discoveries) s += d.loop.duration();
    return s;
}

double total_loop_time(const CapacityCurve& eta, double T, const LoopSoup& soup, const DiscoverOptions& opt) {
    return total_loop_time(discover(eta, T, soup, opt));
}

ConformalMap slit_halfdisk_phi(double R, double t) {
    if (!(R > 0.0) || !(t >= 0.0) || !(4.0 * t < R * R))
        fail(ErrorCode::InvalidArgument, "need 0 <= t < R^2 / 4");
    const double hp = 2.0 * std::sqrt(t) * R / (R * R - 4.0 * t);
    return ConformalMap()
        .then(Primitive::inverse_slit_map(t))
        .then(halfdisk_uniformizer(R))
        .then(Primitive::slit_map(0.25 * hp * hp));
}

double slit_halfdisk_schwarzian(double R, double t) {
    const ConformalMap m = slit_halfdisk_phi(R, t);
    const double h = 1e-3 * (R - 2.0 * std::sqrt(t));
    return schwarzian_boundary(m, 0.0, Complex(0.0, 1.0), h).real();
}

double schwarzian_escape_integral(double R, double T) {
    if (!(T >= 0.0) || !(4.0 * T < R * R)) fail(ErrorCode::InvalidArgument, "need 0 <= T < R^2 / 4");
    if (T == 0.0) return 0.0;
    // t = u^2 removes the sqrt(t) behaviour at the origin
    auto f = [R](double u) { return 2.0 * u * slit_halfdisk_schwarzian(R, u * u); };
    return boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, std::sqrt(T));
}

bool loop_escapes(const Loop& l, const Domain& d, double dt_fine, RngStream rng) {
    if (d.kind() == Domain::Kind::HalfPlane) return false;
    if (d.kind() != Domain::Kind::HalfDisk) fail(ErrorCode::InvalidArgument, "escape check supports H and R D+");
    const double R = d.params().at(0);
    PathBuffer path{l.times(), l.points()};
    static const Domain h = Domain::half_plane();
    RefineSpec spec;
    spec.dt_min = dt_fine;
    spec.conditioned_inside = &h;
    spec.need = near_set([R](Complex z) { return std::abs(R - std::abs(z)); });
    refine_path(path, spec, rng);
    // The loop is known to stay in H; only the circular arc is tested.
    double da = R - std::abs(path.z[0]);
    if (da <= 0.0) return true;
    for (std::size_t i = 1; i < path.z.size(); ++i) {
        double db = R - std::abs(path.z[i]);
        if (db <= 0.0) return true;
        double p = bridge_crossing_probability(da, db, path.t[i] - path.t[i - 1]);
        if (p > 1e-300 && rng.uniform() < p) return true;
        da = db;
    }
    return false;
}

NonEscape non_escape_check(const LoopAddSetup& s, double R, std::uint64_t soups, std::uint64_t seed, int threads) {
    if (soups < 2) fail(ErrorCode::InvalidArgument, "need at least two soups");
    VerticalSlit eta;
    const bool whole = !std::isfinite(R);
    if (!whole && !(4.0 * s.T < R * R)) fail(ErrorCode::InvalidArgument, "the slit must stay inside R D+");
    LoopAddSetup set = s;
    if (!whole) set.rho = R - 2.0 * std::sqrt(s.T);
    LoopAddRun run = make_loop_add_run(eta, set);
    run.discover.refine_radius_above = 0.0;
    const Domain d = whole ? Domain::half_plane() : Domain::half_disk(R);
    std::uint64_t clean = 0;
    for (std::uint64_t i = 0; i < soups; ++i) {
        LoopSoup soup = sample_loop_soup(s.lambda, run.window, run.sampling, RngStream(seed, i), threads);
        bool escaped = false;
        for (const auto& item : soup.loops) {
            if (!first_hit(eta, s.T, item.loop.canonical(), run.discover.delta_hit)) continue;
            if (loop_escapes(item.loop.canonical(), d, s.dt_fine, soup.loop_stream(item.id, 0xE5CAull))) {
                escaped = true;
                break;
            }
        }
        if (!escaped) ++clean;
    }
    const double f = double(clean) / double(soups);
    const double predicted = whole ? 1.0 : std::exp(s.lambda / 6.0 * schwarzian_escape_integral(R, s.T));
    return {f, std::sqrt(std::max(f * (1.0 - f), 1e-300) / double(soups)), soups, predicted};
}

json discovery_to_json(const Discovery& d) {
    return json{{"r_j", d.r},
                {"t_gamma", d.loop.duration()},
                {"rad_bubble", d.bubble_radius},
                {"loop_id", d.loop_id},
                {"root_angle", d.root_angle},
                {"snap", d.snap},
                {"near_double_hit", d.near_double_hit}};
}

void write_discoveries_ndjson(std::ostream& os, const json& header, const std::vector<Discovery>& ds) {
    os << header.dump() << '\n';
    for (const auto& d : ds) os << discovery_to_json(d).dump() << '\n';
}

} // namespace loopsoup
