#include "loopsoup/kernels.hpp"

#include "loopsoup/error.hpp"

#include <cmath>
#include <numbers>

namespace loopsoup {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSeriesTol = 1e-12;
constexpr int kMaxTerms = 10'000'000;
} // namespace

double poisson_kernel_halfplane(Complex z, double x) {
    if (!(z.imag() > 0.0)) fail(ErrorCode::OutOfDomain, "half-plane kernel needs Im z > 0");
    double dx = z.real() - x;
    return z.imag() / (kPi * (dx * dx + z.imag() * z.imag()));
}

double poisson_kernel_halfplane_boundary(double x) {
    if (x == 0.0) fail(ErrorCode::OutOfDomain, "boundary kernel is singular at 0");
    return 1.0 / (kPi * x * x);
}

double poisson_kernel_halfdisk(Complex z, double phi) {
    if (!(z.imag() > 0.0) || !(std::abs(z) < 1.0)) fail(ErrorCode::OutOfDomain, "point not in D+");
    if (!(phi > 0.0 && phi < kPi)) fail(ErrorCode::OutOfDomain, "boundary angle must lie in (0, pi)");
    // f(z) = -z - 1/z maps D+ onto H, the arc onto [-2, 2], |f'(e^{i phi})| = 2 sin phi.
    Complex fz = -z - 1.0 / z;
    double fw = -2.0 * std::cos(phi);
    return 2.0 * std::sin(phi) * poisson_kernel_halfplane(fz, fw);
}

double poisson_kernel_exterior_halfdisk(Complex z, double phi) {
    if (!(z.imag() > 0.0) || !(std::abs(z) > 1.0)) fail(ErrorCode::OutOfDomain, "point not in H minus D+");
    if (!(phi > 0.0 && phi < kPi)) fail(ErrorCode::OutOfDomain, "boundary angle must lie in (0, pi)");
    // z -> -1/z exchanges the two domains and is an isometry on the unit circle.
    return poisson_kernel_halfdisk(-1.0 / z, kPi - phi);
}

namespace {

void check_annular(double s, double theta, double r) {
    if (!(r > 0.0 && r < 0.5)) fail(ErrorCode::NonConvergent, "inner radius must lie in (0, 1/2)");
    if (!(s > 0.0 && std::exp(-s) > r)) fail(ErrorCode::NonConvergent, "need r < e^{-s} < 1");
    if (!(theta > 0.0 && theta < kPi)) fail(ErrorCode::NonConvergent, "angle must lie in (0, pi)");
}

// Sums a_n * r^n sinh(ns)/(1 - r^{2n}) * sin(n theta) with |a_n| <= amax.
template <class Coef>
SeriesValue annular_series(double s, double theta, double r, double amax, Coef coef) {
    const double q = r * std::exp(s);
    const double scale = amax / (1.0 - r * r);
    double sum = 0.0;
    double rn = 1.0;
    for (int n = 1; n <= kMaxTerms; ++n) {
        rn *= r;
        double term = coef(n) * std::sin(n * theta) * std::sinh(n * s) * rn / (1.0 - rn * rn);
        sum += term;
        // |later terms| <= scale * q^m / 2 each
        double tail = 0.5 * scale * std::pow(q, n + 1) / (1.0 - q);
        if (tail <= kSeriesTol * std::abs(sum) || tail < 1e-300) return {sum, n};
    }
    fail(ErrorCode::NonConvergent, "annular series did not reach tolerance");
}

} // namespace

SeriesValue poisson_kernel_annular_halfdisk(double s, double theta, double r, double phi) {
    check_annular(s, theta, r);
    if (!(phi > 0.0 && phi < kPi)) fail(ErrorCode::NonConvergent, "angle must lie in (0, pi)");
    auto v = annular_series(s, theta, r, 1.0, [phi](int n) { return std::sin(n * phi); });
    v.value *= 4.0 / (kPi * r);
    return v;
}

SeriesValue annular_halfdisk_exit_probability(double s, double theta, double r, double phi0, double phi1) {
    check_annular(s, theta, r);
    if (!(0.0 <= phi0 && phi0 < phi1 && phi1 <= kPi)) fail(ErrorCode::NonConvergent, "bad angular interval");
    auto v = annular_series(s, theta, r, 2.0,
                            [phi0, phi1](int n) { return (std::cos(n * phi0) - std::cos(n * phi1)) / n; });
    v.value *= 4.0 / kPi;
    return v;
}

double green_excursion(Complex z) {
    if (!(z.imag() > 0.0)) fail(ErrorCode::OutOfDomain, "excursion Green's function needs Im z > 0");
    return 2.0 * z.imag() * z.imag() / std::norm(z);
}

} // namespace loopsoup
