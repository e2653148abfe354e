#include "loopsoup/curves.hpp"

#include "loopsoup/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loopsoup {

const char* to_string(CurveKind kind) {
    switch (kind) {
    case CurveKind::Path: return "path";
    case CurveKind::Bridge: return "bridge";
    case CurveKind::Excursion: return "excursion";
    case CurveKind::Bubble: return "bubble";
    case CurveKind::Loop: return "loop";
    case CurveKind::Trace: return "trace";
    }
    return "path";
}

CurveKind curve_kind_from_string(const std::string& name) {
    for (auto k : {CurveKind::Path, CurveKind::Bridge, CurveKind::Excursion, CurveKind::Bubble, CurveKind::Loop,
                   CurveKind::Trace})
        if (name == to_string(k)) return k;
    fail(ErrorCode::InvalidArgument, "unknown curve kind '" + name + "'");
}

Curve::Curve(std::vector<double> times, std::vector<Complex> points, CurveKind kind)
    : times_(std::move(times)), points_(std::move(points)), kind_(kind) {
    if (times_.size() != points_.size()) fail(ErrorCode::InvalidArgument, "curve times and points differ in length");
    if (times_.size() < 2) fail(ErrorCode::InvalidArgument, "curve needs at least two samples");
    if (times_[0] != 0.0) fail(ErrorCode::InvalidArgument, "curve time must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1])) fail(ErrorCode::InvalidArgument, "curve times must increase strictly");
    if (!std::isfinite(times_.back())) fail(ErrorCode::InvalidArgument, "curve duration must be finite");
    for (const auto& p : points_)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            fail(ErrorCode::InvalidArgument, "curve points must be finite");
}

Loop::Loop(Curve c) : curve_(std::move(c)) {
    if (!curve_.closed()) fail(ErrorCode::EndpointMismatch, "loop must end where it starts");
    curve_.set_kind(CurveKind::Loop);
}

std::size_t lowest_imag_index(const Curve& c) {
    const auto& p = c.points();
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
        if (p[i].imag() < p[best].imag()) best = i;
    return best;
}

std::size_t max_abs_index(const Curve& c) {
    const auto& p = c.points();
    std::size_t best = 0;
    double m = std::norm(p[0]);
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        double v = std::norm(p[i]);
        if (v > m) {
            m = v;
            best = i;
        }
    }
    return best;
}

Loop shift_loop(const Loop& l, std::size_t k) {
    const auto& t = l.times();
    const auto& p = l.points();
    const std::size_t n = t.size() - 1;
    if (k >= n) fail(ErrorCode::InvalidArgument, "shift index out of range");
    if (k == 0) return l;
    std::vector<double> nt;
    std::vector<Complex> np;
    nt.reserve(n + 1);
    np.reserve(n + 1);
    const double tk = t[k];
    const double T = t[n];
    for (std::size_t j = k; j < n; ++j) {
        nt.push_back(t[j] - tk);
        np.push_back(p[j]);
    }
    for (std::size_t j = 0; j <= k; ++j) {
        double v = (T - tk) + t[j];
        // keep strict monotonicity if rounding collapses neighbours
        if (v <= nt.back()) v = std::nextafter(nt.back(), std::numeric_limits<double>::infinity());
        nt.push_back(v);
        np.push_back(p[j]);
    }
    return Loop(Curve(std::move(nt), std::move(np), CurveKind::Loop));
}

UnrootedLoop::UnrootedLoop(const Loop& l) : rep_(shift_loop(l, lowest_imag_index(l.curve()))) {}

Curve concat(const Curve& a, const Curve& b) {
    if (a.back() != b.front()) fail(ErrorCode::EndpointMismatch, "concat needs a.last == b.first");
    std::vector<double> t = a.times();
    std::vector<Complex> p = a.points();
    t.reserve(a.size() + b.size() - 1);
    p.reserve(a.size() + b.size() - 1);
    const double ta = a.duration();
    for (std::size_t i = 1; i < b.size(); ++i) {
        t.push_back(ta + b.times()[i]);
        p.push_back(b.points()[i]);
    }
    return Curve(std::move(t), std::move(p), CurveKind::Path);
}

Curve reverse(const Curve& c) {
    const std::size_t n = c.size();
    const double T = c.duration();
    std::vector<double> t(n);
    std::vector<Complex> p(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = T - c.times()[n - 1 - i];
        p[i] = c.points()[n - 1 - i];
    }
    t[0] = 0.0;
    t[n - 1] = T;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (!(t[i] > t[i - 1])) t[i] = std::nextafter(t[i - 1], T);
    return Curve(std::move(t), std::move(p), c.kind());
}

Curve conformal_image(const ConformalMap& m, const Curve& c) {
    const std::size_t n = c.size();
    const auto& t = c.times();
    std::vector<Complex> p(n);
    std::vector<double> w(n); // |f'|^2, +inf at singular endpoints
    for (std::size_t i = 0; i < n; ++i) {
        Complex z = c.points()[i];
        auto vd = m.try_value_derivative(z);
        if (vd) {
            p[i] = vd->first;
            w[i] = std::norm(vd->second);
            if (!std::isfinite(w[i])) fail(ErrorCode::NonIntegrable, "derivative overflow");
            continue;
        }
        if (i != 0 && i != n - 1) {
            // interior: OutOfDomain if the chain rejects the point, otherwise a blow-up
            p[i] = m.apply(z);
            fail(ErrorCode::NonIntegrable, "derivative blows up at an interior sample");
        }
        // Endpoint: the value must exist; the derivative may be infinite.
        Complex v = z;
        for (const auto& prim : m.primitives()) v = prim.apply(v);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            fail(ErrorCode::OutOfDomain, "endpoint maps outside the plane");
        p[i] = v;
        w[i] = std::numeric_limits<double>::infinity();
    }
    std::vector<double> s(n);
    s[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double h = t[i] - t[i - 1];
        double inc;
        if (std::isinf(w[i - 1]) && std::isinf(w[i])) fail(ErrorCode::NonIntegrable, "singular segment");
        else if (std::isinf(w[i - 1])) inc = 2.0 * h * w[i];
        else if (std::isinf(w[i])) inc = 2.0 * h * w[i - 1];
        else inc = 0.5 * h * (w[i - 1] + w[i]);
        double next = s[i - 1] + inc;
        if (!(next > s[i - 1])) next = std::nextafter(s[i - 1], std::numeric_limits<double>::infinity());
        s[i] = next;
    }
    return Curve(std::move(s), std::move(p), c.kind());
}

double curve_distance(const Curve& a, const Curve& b) {
    const std::size_t n = a.size(), m = b.size();
    const auto& ta = a.times();
    const auto& tb = b.times();
    const auto& pa = a.points();
    const auto& pb = b.points();
    auto cost = [&](std::size_t i, std::size_t j) { return std::abs(ta[i] - tb[j]) + std::abs(pa[i] - pb[j]); };
    std::vector<double> prev(m), cur(m);
    prev[0] = cost(0, 0);
    for (std::size_t j = 1; j < m; ++j) prev[j] = std::max(prev[j - 1], cost(0, j));
    for (std::size_t i = 1; i < n; ++i) {
        cur[0] = std::max(prev[0], cost(i, 0));
        for (std::size_t j = 1; j < m; ++j)
            cur[j] = std::max(cost(i, j), std::min({prev[j], cur[j - 1], prev[j - 1]}));
        std::swap(prev, cur);
    }
    return prev[m - 1];
}

double unrooted_distance(const UnrootedLoop& a, const UnrootedLoop& b) {
    const Loop& la = a.canonical();
    double best = curve_distance(la.curve(), b.canonical().curve());
    for (std::size_t k = 1; k + 1 < la.size() && best > 0.0; ++k)
        best = std::min(best, curve_distance(shift_loop(la, k).curve(), b.canonical().curve()));
    return best;
}

Loop reroot(const Loop& l, RootRule rule) {
    switch (rule) {
    case RootRule::LowestImag: return shift_loop(l, lowest_imag_index(l.curve()));
    case RootRule::MaxAbs: return shift_loop(l, max_abs_index(l.curve()));
    }
    return l;
}

Loop reroot_at(const Loop& l, Complex p, double delta_hit) {
    const auto& pts = l.points();
    std::size_t best = 0;
    double d = std::abs(pts[0] - p);
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        double v = std::abs(pts[i] - p);
        if (v < d) {
            d = v;
            best = i;
        }
    }
    if (!(d <= delta_hit)) fail(ErrorCode::PointNotOnLoop, "no loop sample within delta_hit of the point");
    return shift_loop(l, best);
}

double radius(const Curve& c) {
    double m = 0.0;
    for (const auto& p : c.points()) m = std::max(m, std::norm(p));
    return std::sqrt(m);
}

bool Hull::contains(Complex z) const {
    int i = int(std::floor((z.real() - x0) / h));
    int j = int(std::floor((z.imag() - y0) / h));
    if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
    return at(i, j);
}

double Hull::area() const {
    std::size_t k = 0;
    for (auto c : cells) k += c;
    return double(k) * h * h;
}

Hull fill_hull(const Loop& l, double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "grid step must be positive");
    const auto& pts = l.points();
    double xmin = pts[0].real(), xmax = xmin, ymin = pts[0].imag(), ymax = ymin;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.real());
        xmax = std::max(xmax, p.real());
        ymin = std::min(ymin, p.imag());
        ymax = std::max(ymax, p.imag());
    }
    double diameter = std::max(xmax - xmin, ymax - ymin);
    if (!(h < diameter)) fail(ErrorCode::DegenerateGrid, "grid step exceeds loop diameter");
    Hull hull;
    hull.h = h;
    hull.x0 = xmin - 2.0 * h;
    hull.y0 = ymin - 2.0 * h;
    hull.nx = int(std::ceil((xmax - hull.x0) / h)) + 2;
    hull.ny = int(std::ceil((ymax - hull.y0) / h)) + 2;
    const int nx = hull.nx, ny = hull.ny;
    // 0 = unknown, 1 = curve, 2 = outside
    std::vector<std::uint8_t> g(std::size_t(nx) * ny, 0);
    auto mark = [&](Complex z) {
        int i = int(std::floor((z.real() - hull.x0) / h));
        int j = int(std::floor((z.imag() - hull.y0) / h));
        g[std::size_t(j) * nx + i] = 1;
    };
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        Complex a = pts[k], b = pts[k + 1];
        int steps = int(std::ceil(std::abs(b - a) / (0.25 * h)));
        for (int s = 0; s <= steps; ++s) mark(a + (b - a) * (steps == 0 ? 0.0 : double(s) / steps));
    }
    std::vector<int> stack;
    auto push = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= nx || j >= ny) return;
        auto& c = g[std::size_t(j) * nx + i];
        if (c != 0) return;
        c = 2;
        stack.push_back(j * nx + i);
    };
    for (int i = 0; i < nx; ++i) {
        push(i, 0);
        push(i, ny - 1);
    }
    for (int j = 0; j < ny; ++j) {
        push(0, j);
        push(nx - 1, j);
    }
    while (!stack.empty()) {
        int c = stack.back();
        stack.pop_back();
        int i = c % nx, j = c / nx;
        push(i + 1, j);
        push(i - 1, j);
        push(i, j + 1);
        push(i, j - 1);
    }
    hull.cells.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) hull.cells[k] = g[k] != 2;
    return hull;
}

} // namespace loopsoup
