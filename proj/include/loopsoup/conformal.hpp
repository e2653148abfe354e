#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace loopsoup {

using Complex = std::complex<double>;

// Modulus without hypot's overflow guards; for moderate magnitudes.
inline double modulus(Complex z) { return std::sqrt(std::norm(z)); }

// Value and first three derivatives of an analytic map at a point.
struct Jet {
    Complex value;
    Complex d1;
    Complex d2;
    Complex d3;
};

class Primitive {
public:
    enum class Kind {
        Translation,
        Scaling,
        Mobius,
        Joukowski,        // z -> -z - 1/z, maps D+ onto H
        InverseJoukowski, // root of w^2 + z w + 1 = 0 in the closed upper unit half-disk
        Inversion,        // z -> -1/z
        SlitMap,          // z -> sqrt(z^2 + 4t), continuous on H minus [0, 2i sqrt t]
        InverseSlitMap,   // w -> sqrt(w^2 - 4t)
        Exp,
        Log,              // principal branch, H -> strip 0 < Im < pi
    };

    static Primitive translation(Complex c);
    static Primitive scaling(double r);
    static Primitive mobius(Complex a, Complex b, Complex c, Complex d);
    static Primitive joukowski();
    static Primitive inverse_joukowski();
    static Primitive inversion();
    static Primitive slit_map(double t);
    static Primitive inverse_slit_map(double t);
    static Primitive exp();
    static Primitive log();

    Kind kind() const { return kind_; }
    bool valid_at(Complex z) const;
    Jet jet(Complex z) const; // throws OutOfDomain
    Complex apply(Complex z) const;
    Complex schwarzian(Complex z) const;
    Primitive inverse() const;
    std::string describe() const;

private:
    friend class ConformalMap;
    Primitive(Kind kind) : kind_(kind) {}
    Jet jet_unchecked(Complex z) const;
    std::pair<Complex, Complex> value_derivative_unchecked(Complex z) const;

    Kind kind_;
    Complex a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0};
    double t_ = 0.0;
};

// A chain of primitives; the first element is applied first.
class ConformalMap {
public:
    ConformalMap() = default;
    explicit ConformalMap(std::vector<Primitive> chain) : chain_(std::move(chain)) {}

    ConformalMap then(const Primitive& p) const;
    ConformalMap then(const ConformalMap& m) const;
    ConformalMap inverse() const;

    Complex apply(Complex z) const;
    Complex derivative(Complex z) const;
    Jet jet(Complex z) const;
    // Computed from exact primitive Schwarzians through the cocycle
    // S_{p o g} = (S_p o g) g'^2 + S_g.
    Complex schwarzian(Complex z) const;
    // Non-throwing evaluation of value and derivative; nullopt when z leaves a
    // primitive's domain or the result is not finite.
    std::optional<std::pair<Complex, Complex>> try_value_derivative(Complex z) const noexcept;

    std::span<const Primitive> primitives() const { return chain_; }
    bool empty() const { return chain_.empty(); }

private:
    std::vector<Primitive> chain_;
};

// R*D+ -> H with 0 -> 0, equal to R z / (z^2 + R^2), written as a chain that
// is analytic at the origin.
ConformalMap halfdisk_uniformizer(double R);
// H -> D+ with 0 -> 0 and infinity -> e^{i theta}.
ConformalMap halfplane_to_halfdisk(double theta);

// Schwarzian at a boundary point b where the chain is only evaluable from
// inside, extrapolated from b + h n, b + 2h n, b + 3h n (error O(h^3)).
Complex schwarzian_boundary(const ConformalMap& m, Complex b, Complex inward, double h);

class Domain {
public:
    enum class Kind { HalfPlane, HalfDisk, AnnularHalfDisk, SlitHalfPlane, ExteriorHalfDisk, Rectangle };

    static Domain half_plane();
    static Domain half_disk(double R);
    // {z in R*D+ : |z| > r}
    static Domain annular_half_disk(double r, double R = 1.0);
    // H minus the vertical slit [0, 2i sqrt t]
    static Domain slit_half_plane(double t);
    // H minus r * closure(D+)
    static Domain exterior_half_disk(double r);
    static Domain rectangle(double x0, double y0, double x1, double y1);

    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return p_; }
    std::string name() const;

    // Positive inside; for smooth pieces equals the distance to the boundary,
    // near corners a lower bound on it.
    double signed_distance(Complex z) const;
    bool contains(Complex z) const { return signed_distance(z) > 0.0; }

private:
    Domain(Kind k, std::vector<double> p) : kind_(k), p_(std::move(p)) {}
    Kind kind_;
    std::vector<double> p_;
};

double distance_to_segment(Complex z, Complex a, Complex b);

} // namespace loopsoup
