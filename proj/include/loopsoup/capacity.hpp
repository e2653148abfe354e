#pragma once

#include "loopsoup/conformal.hpp"
#include "loopsoup/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace loopsoup {

// Bounded hull A in the closed upper half-plane, attached to the real line.
struct HcapSet {
    enum class Kind { HalfDisk, VerticalSlit };
    Kind kind;
    double size; // radius of r * closure(D+), or height of [0, i h]

    static HcapSet half_disk(double r);
    static HcapSet vertical_slit(double h);
    static HcapSet from_name(const std::string& name, double size);

    double radius() const { return size; }
    double distance(Complex z) const;
    Complex project(Complex z) const;
    double exact() const; // r^2 or h^2 / 2
    std::string name() const;
};

struct WalkOptions {
    double snap = 1e-5;           // relative to rad(A)
    std::uint64_t max_steps = 1'000'000;
};

struct Estimate {
    double value;
    double std_error;
    std::uint64_t n;
};

// y E^{iy}[Im B at the hitting time of A u R] by walk-on-spheres from iy.
Estimate estimate_hcap(const HcapSet& a, double y, std::uint64_t n, std::uint64_t seed, int threads = 1,
                       const WalkOptions& opt = {});

struct Contact {
    double r;      // capacity time
    Complex point; // point of the segment touched
    Complex tip;   // eta(r), exactly the point that g(r) sends to 0
};

// A curve parametrized by half-plane capacity, hcap(eta[0, t]) = 2t, together
// with its Loewner maps.
class CapacityCurve {
public:
    virtual ~CapacityCurve() = default;
    virtual std::string name() const = 0;
    virtual Complex tip(double t) const = 0;
    // H minus eta[0, t] -> H, tip -> 0, ~ z at infinity
    virtual ConformalMap g(double t) const = 0;
    virtual ConformalMap f(double t) const = 0;
    virtual double distance_to_trace(Complex z, double t) const = 0;
    // Least r <= T at which the closed delta-neighbourhood of eta[0, r]
    // meets the segment [a, b], located to within delta / 10.
    virtual std::optional<Contact> first_contact(Complex a, Complex b, double delta, double T) const = 0;
};

// eta(t) = 2 i sqrt(t)
class VerticalSlit final : public CapacityCurve {
public:
    std::string name() const override { return "vertical-slit"; }
    Complex tip(double t) const override;
    ConformalMap g(double t) const override;
    ConformalMap f(double t) const override;
    double distance_to_trace(Complex z, double t) const override;
    std::optional<Contact> first_contact(Complex a, Complex b, double delta, double T) const override;
};

std::pair<ConformalMap, ConformalMap> loewner_maps(double t);

} // namespace loopsoup
