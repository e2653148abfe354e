#include "loopsoup/conformal.hpp"

#include "loopsoup/error.hpp"

#include <cmath>
#include <sstream>

namespace loopsoup {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string fmt(Complex z) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << z.real() << "," << z.imag() << ")";
    return os.str();
}

// Jet of the inverse g = f^{-1} at w, given the jet of f at z = g(w).
Jet inverse_jet(Complex z, const Jet& f) {
    Complex inv = 1.0 / f.d1;
    Complex inv2 = inv * inv;
    Complex inv3 = inv2 * inv;
    Jet g;
    g.value = z;
    g.d1 = inv;
    g.d2 = -f.d2 * inv3;
    g.d3 = (3.0 * f.d2 * f.d2 - f.d1 * f.d3) * inv3 * inv2;
    return g;
}

Jet joukowski_jet(Complex z) {
    Complex z2 = z * z;
    return {-z - 1.0 / z, -1.0 + 1.0 / z2, -2.0 / (z2 * z), 6.0 / (z2 * z2)};
}

Complex joukowski_root(Complex zeta) {
    Complex s = std::sqrt(zeta * zeta - 4.0);
    Complex p = (-zeta + s) * 0.5;
    Complex m = (-zeta - s) * 0.5;
    Complex big = std::abs(p) >= std::abs(m) ? p : m;
    Complex small = 1.0 / big;
    if (std::abs(small) < 1.0 - 1e-14) return small;
    return small.imag() >= big.imag() ? small : big;
}

Complex schwarzian_of(const Jet& j) {
    Complex r = j.d2 / j.d1;
    return j.d3 / j.d1 - 1.5 * r * r;
}

} // namespace

Primitive Primitive::translation(Complex c) {
    Primitive p(Kind::Translation);
    p.b_ = c;
    return p;
}

Primitive Primitive::scaling(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::InvalidArgument, "scaling factor must be positive");
    Primitive p(Kind::Scaling);
    p.a_ = r;
    return p;
}

Primitive Primitive::mobius(Complex a, Complex b, Complex c, Complex d) {
    if (std::abs(a * d - b * c) == 0.0) fail(ErrorCode::InvalidArgument, "mobius map needs ad - bc != 0");
    Primitive p(Kind::Mobius);
    p.a_ = a;
    p.b_ = b;
    p.c_ = c;
    p.d_ = d;
    return p;
}

Primitive Primitive::joukowski() { return Primitive(Kind::Joukowski); }
Primitive Primitive::inverse_joukowski() { return Primitive(Kind::InverseJoukowski); }
Primitive Primitive::inversion() { return Primitive(Kind::Inversion); }
Primitive Primitive::exp() { return Primitive(Kind::Exp); }
Primitive Primitive::log() { return Primitive(Kind::Log); }

Primitive Primitive::slit_map(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::InvalidArgument, "slit capacity must be nonnegative");
    Primitive p(Kind::SlitMap);
    p.t_ = t;
    return p;
}

Primitive Primitive::inverse_slit_map(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::InvalidArgument, "slit capacity must be nonnegative");
    Primitive p(Kind::InverseSlitMap);
    p.t_ = t;
    return p;
}

bool Primitive::valid_at(Complex z) const {
    if (!finite(z)) return false;
    switch (kind_) {
    case Kind::Translation:
    case Kind::Scaling:
    case Kind::Exp:
        return true;
    case Kind::Mobius:
        return std::abs(c_ * z + d_) > 0.0;
    case Kind::Joukowski:
    case Kind::Inversion:
        return z != Complex(0.0);
    case Kind::InverseJoukowski:
    case Kind::InverseSlitMap:
        return z.imag() >= 0.0;
    case Kind::SlitMap:
        return z.imag() >= 0.0 && (z != Complex(0.0) || t_ == 0.0);
    case Kind::Log:
        return z.imag() >= 0.0 && z != Complex(0.0);
    }
    return false;
}

Jet Primitive::jet_unchecked(Complex z) const {
    switch (kind_) {
    case Kind::Translation:
        return {z + b_, 1.0, 0.0, 0.0};
    case Kind::Scaling:
        return {a_ * z, a_, 0.0, 0.0};
    case Kind::Mobius: {
        Complex den = c_ * z + d_;
        Complex det = a_ * d_ - b_ * c_;
        Complex d2 = den * den;
        return {(a_ * z + b_) / den, det / d2, -2.0 * c_ * det / (d2 * den), 6.0 * c_ * c_ * det / (d2 * d2)};
    }
    case Kind::Joukowski:
        return joukowski_jet(z);
    case Kind::InverseJoukowski: {
        Complex w = joukowski_root(z);
        return inverse_jet(w, joukowski_jet(w));
    }
    case Kind::Inversion: {
        Complex z2 = z * z;
        return {-1.0 / z, 1.0 / z2, -2.0 / (z2 * z), 6.0 / (z2 * z2)};
    }
    case Kind::SlitMap: {
        if (t_ == 0.0) return {z, 1.0, 0.0, 0.0};
        // q vanishes exactly at the tip i*h when t = h*h/4
        Complex z2 = z * z;
        Complex q = z2 + 4.0 * t_;
        Complex g = q == Complex(0.0) ? Complex(0.0) : z * std::sqrt(q / z2);
        Complex g2 = g * g;
        return {g, z / g, 4.0 * t_ / (g2 * g), -12.0 * t_ * z / (g2 * g2 * g)};
    }
    case Kind::InverseSlitMap: {
        Complex f;
        double h = 2.0 * std::sqrt(t_);
        if (z == Complex(0.0)) {
            f = Complex(0.0, h);
        } else if (z.imag() == 0.0 && std::abs(z.real()) < h) {
            f = Complex(0.0, std::sqrt(4.0 * t_ - z.real() * z.real()));
        } else {
            f = z * std::sqrt(1.0 - 4.0 * t_ / (z * z));
        }
        Complex f2 = f * f;
        return {f, z / f, -4.0 * t_ / (f2 * f), 12.0 * t_ * z / (f2 * f2 * f)};
    }
    case Kind::Exp: {
        Complex e = std::exp(z);
        return {e, e, e, e};
    }
    case Kind::Log:
        return {std::log(z), 1.0 / z, -1.0 / (z * z), 2.0 / (z * z * z)};
    }
    return {};
}

std::pair<Complex, Complex> Primitive::value_derivative_unchecked(Complex z) const {
    switch (kind_) {
    case Kind::Translation:
        return {z + b_, 1.0};
    case Kind::Scaling:
        return {a_ * z, a_};
    case Kind::SlitMap: {
        if (t_ == 0.0) return {z, 1.0};
        Complex z2 = z * z;
        Complex q = z2 + 4.0 * t_;
        Complex g = q == Complex(0.0) ? Complex(0.0) : z * std::sqrt(q / z2);
        return {g, z / g};
    }
    case Kind::Inversion:
        return {-1.0 / z, 1.0 / (z * z)};
    default: {
        Jet j = jet_unchecked(z);
        return {j.value, j.d1};
    }
    }
}

Jet Primitive::jet(Complex z) const {
    if (!valid_at(z)) fail(ErrorCode::OutOfDomain, describe() + " undefined at " + fmt(z));
    return jet_unchecked(z);
}

Complex Primitive::apply(Complex z) const { return jet(z).value; }

Complex Primitive::schwarzian(Complex z) const {
    switch (kind_) {
    case Kind::Translation:
    case Kind::Scaling:
    case Kind::Mobius:
    case Kind::Inversion:
        if (!valid_at(z)) fail(ErrorCode::OutOfDomain, describe() + " undefined at " + fmt(z));
        return 0.0;
    case Kind::Exp:
        return -0.5;
    case Kind::Log:
        if (!valid_at(z)) fail(ErrorCode::OutOfDomain, describe() + " undefined at " + fmt(z));
        return 0.5 / (z * z);
    default:
        break;
    }
    Jet j = jet(z);
    if (!(std::abs(j.d1) > 1e-300) || !finite(j.d1))
        fail(ErrorCode::DegenerateDerivative, describe() + " has degenerate derivative at " + fmt(z));
    return schwarzian_of(j);
}

Primitive Primitive::inverse() const {
    switch (kind_) {
    case Kind::Translation: return translation(-b_);
    case Kind::Scaling: return scaling(1.0 / a_.real());
    case Kind::Mobius: return mobius(d_, -b_, -c_, a_);
    case Kind::Joukowski: return inverse_joukowski();
    case Kind::InverseJoukowski: return joukowski();
    case Kind::Inversion: return inversion();
    case Kind::SlitMap: return inverse_slit_map(t_);
    case Kind::InverseSlitMap: return slit_map(t_);
    case Kind::Exp: return log();
    case Kind::Log: return exp();
    }
    return *this;
}

std::string Primitive::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case Kind::Translation: os << "translation" << fmt(b_); break;
    case Kind::Scaling: os << "scaling(" << a_.real() << ")"; break;
    case Kind::Mobius: os << "mobius" << fmt(a_) << fmt(b_) << fmt(c_) << fmt(d_); break;
    case Kind::Joukowski: os << "joukowski"; break;
    case Kind::InverseJoukowski: os << "inverse-joukowski"; break;
    case Kind::Inversion: os << "inversion"; break;
    case Kind::SlitMap: os << "slit-map(" << t_ << ")"; break;
    case Kind::InverseSlitMap: os << "inverse-slit-map(" << t_ << ")"; break;
    case Kind::Exp: os << "exp"; break;
    case Kind::Log: os << "log"; break;
    }
    return os.str();
}

ConformalMap ConformalMap::then(const Primitive& p) const {
    ConformalMap m = *this;
    m.chain_.push_back(p);
    return m;
}

ConformalMap ConformalMap::then(const ConformalMap& other) const {
    ConformalMap m = *this;
    m.chain_.insert(m.chain_.end(), other.chain_.begin(), other.chain_.end());
    return m;
}

ConformalMap ConformalMap::inverse() const {
    std::vector<Primitive> inv;
    inv.reserve(chain_.size());
    for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) inv.push_back(it->inverse());
    return ConformalMap(std::move(inv));
}

Complex ConformalMap::apply(Complex z) const {
    for (const auto& p : chain_) z = p.apply(z);
    return z;
}

Complex ConformalMap::derivative(Complex z) const {
    Complex d = 1.0;
    for (const auto& p : chain_) {
        Jet j = p.jet(z);
        d *= j.d1;
        z = j.value;
    }
    return d;
}

Jet ConformalMap::jet(Complex z) const {
    Jet h{z, 1.0, 0.0, 0.0};
    for (const auto& p : chain_) {
        Jet j = p.jet(h.value);
        Jet n;
        n.value = j.value;
        n.d1 = j.d1 * h.d1;
        n.d2 = j.d2 * h.d1 * h.d1 + j.d1 * h.d2;
        n.d3 = j.d3 * h.d1 * h.d1 * h.d1 + 3.0 * j.d2 * h.d1 * h.d2 + j.d1 * h.d3;
        h = n;
    }
    return h;
}

Complex ConformalMap::schwarzian(Complex z) const {
    Complex s = 0.0;
    Complex d = 1.0;
    for (const auto& p : chain_) {
        Jet j = p.jet(z);
        s = p.schwarzian(z) * d * d + s;
        d *= j.d1;
        z = j.value;
    }
    if (!(std::abs(d) > 1e-300) || !finite(d))
        fail(ErrorCode::DegenerateDerivative, "chain derivative degenerate");
    return s;
}

std::optional<std::pair<Complex, Complex>> ConformalMap::try_value_derivative(Complex z) const noexcept {
    Complex d = 1.0;
    for (const auto& p : chain_) {
        if (!p.valid_at(z)) return std::nullopt;
        auto [v, d1] = p.value_derivative_unchecked(z);
        d *= d1;
        z = v;
    }
    if (!finite(z) || !finite(d)) return std::nullopt;
    return std::make_pair(z, d);
}

ConformalMap halfdisk_uniformizer(double R) {
    if (!(R > 0.0)) fail(ErrorCode::InvalidArgument, "half-disk radius must be positive");
    // z/R -> (u + a)/(a u + 1) keeps D+ and moves 0 off the pole of the
    // Joukowski map; the final automorphism of H restores 0 -> 0 and matches
    // the first two Taylor coefficients of R z/(z^2 + R^2).
    const double a = 0.5;
    ConformalMap m = ConformalMap()
                         .then(Primitive::scaling(1.0 / R))
                         .then(Primitive::mobius(1.0, a, a, 1.0))
                         .then(Primitive::joukowski())
                         .then(Primitive::translation(a + 1.0 / a));
    Jet j = m.jet(0.0);
    double d1 = j.d1.real();
    double d2 = j.d2.real();
    double d = R * d1;
    double c = d2 * d / (2.0 * d1 * d1);
    return m.then(Primitive::mobius(1.0, 0.0, c, d));
}

ConformalMap halfplane_to_halfdisk(double theta) {
    const double a = -2.0 * std::cos(theta);
    return ConformalMap()
        .then(Primitive::inversion())
        .then(Primitive::translation(a))
        .then(Primitive::inverse_joukowski());
}

Complex schwarzian_boundary(const ConformalMap& m, Complex b, Complex inward, double h) {
    Complex n = inward / std::abs(inward);
    return 3.0 * m.schwarzian(b + h * n) - 3.0 * m.schwarzian(b + 2.0 * h * n) + m.schwarzian(b + 3.0 * h * n);
}

double distance_to_segment(Complex z, Complex a, Complex b) {
    Complex ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return modulus(z - a);
    double s = ((z - a) * std::conj(ab)).real() / len2;
    s = std::clamp(s, 0.0, 1.0);
    return modulus(z - (a + s * ab));
}

namespace {
void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
}
} // namespace

Domain Domain::half_plane() { return Domain(Kind::HalfPlane, {}); }

Domain Domain::half_disk(double R) {
    require_positive(R, "half-disk radius");
    return Domain(Kind::HalfDisk, {R});
}

Domain Domain::annular_half_disk(double r, double R) {
    require_positive(r, "inner radius");
    require_positive(R - r, "annulus width");
    return Domain(Kind::AnnularHalfDisk, {r, R});
}

Domain Domain::slit_half_plane(double t) {
    require_positive(t, "slit capacity");
    return Domain(Kind::SlitHalfPlane, {t});
}

Domain Domain::exterior_half_disk(double r) {
    require_positive(r, "half-disk radius");
    return Domain(Kind::ExteriorHalfDisk, {r});
}

Domain Domain::rectangle(double x0, double y0, double x1, double y1) {
    require_positive(x1 - x0, "rectangle width");
    require_positive(y1 - y0, "rectangle height");
    return Domain(Kind::Rectangle, {x0, y0, x1, y1});
}

std::string Domain::name() const {
    switch (kind_) {
    case Kind::HalfPlane: return "half-plane";
    case Kind::HalfDisk: return "half-disk";
    case Kind::AnnularHalfDisk: return "annular-half-disk";
    case Kind::SlitHalfPlane: return "slit-half-plane";
    case Kind::ExteriorHalfDisk: return "exterior-half-disk";
    case Kind::Rectangle: return "rectangle";
    }
    return "unknown";
}

double Domain::signed_distance(Complex z) const {
    double y = z.imag();
    switch (kind_) {
    case Kind::HalfPlane:
        return y;
    case Kind::HalfDisk:
        return std::min(y, p_[0] - modulus(z));
    case Kind::AnnularHalfDisk: {
        double r = modulus(z);
        return std::min({y, p_[1] - r, r - p_[0]});
    }
    case Kind::SlitHalfPlane:
        return std::min(y, distance_to_segment(z, 0.0, Complex(0.0, 2.0 * std::sqrt(p_[0]))));
    case Kind::ExteriorHalfDisk:
        return std::min(y, modulus(z) - p_[0]);
    case Kind::Rectangle:
        return std::min({z.real() - p_[0], p_[2] - z.real(), y - p_[1], p_[3] - y});
    }
    return 0.0;
}

} // namespace loopsoup
