#pragma once

#include "loopsoup/conformal.hpp"
#include "loopsoup/curves.hpp"
#include "loopsoup/rng.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace loopsoup {

// |mu(z, w; t)| = exp(-|z - w|^2 / 2t) / (2 pi t)
double bridge_mass(Complex z, Complex w, double t);

// Planar Brownian bridge z -> w of duration t on n uniform steps.
Curve sample_bridge(Complex z, Complex w, double t, int n, RngStream& rng);
// Free planar Brownian motion from z on [0, t], n uniform steps.
Curve sample_brownian_path(Complex z, double t, int n, RngStream& rng);
Loop sample_loop_rooted(Complex z, double t, int n, RngStream& rng);

// Minimum of a one-dimensional Brownian bridge from a to b over time h.
double bridge_minimum(double a, double b, double h, RngStream& rng);
// Probability that a planar bridge of duration h between points at distances
// da, db from a straight boundary line touches the line.
double bridge_crossing_probability(double da, double db, double h);

// Step schedule for processes sampled with exact transitions: the next step is
// clamp((kappa * scale(z))^2, dt_min, dt_max).
struct StepPolicy {
    double kappa = 0.15;
    double dt_min = 1e-8;
    double dt_max = std::numeric_limits<double>::infinity();
    std::function<double(Complex)> scale; // empty: |z|
    std::size_t max_steps = 50'000'000;

    static StepPolicy uniform(double dt);
    double step(Complex z) const;
};

// Excursion from 0 to infinity in H: real part Brownian, imaginary part
// Bessel(3), both with exact transitions; stopped at the first sample with
// |z| >= horizon.
Curve sample_excursion_halfplane(double horizon, const StepPolicy& steps, RngStream& rng);

enum class Direction { Out, In };

struct HalfDiskOptions {
    double horizon = 200.0; // of the underlying half-plane excursion
    StepPolicy steps;       // scale defaults to the map's local scale
};

// Normalized excursion in D+ between 0 and e^{i theta}: the image of the
// half-plane excursion under H -> D+, 0 -> 0, infinity -> e^{i theta}, with
// the Brownian clock. The endpoint is placed exactly at e^{i theta}.
Curve sample_excursion_halfdisk(double theta, Direction dir, const HalfDiskOptions& opt, RngStream& rng);

struct BubbleSample {
    Curve curve;
    double root_radius; // r: the bubble is the excursion pair through r e^{i theta}
    double root_angle;  // theta
};

// Normalized bubble law at 0 in H restricted to radius >= r_min.
BubbleSample sample_bubble(double r_min, const HalfDiskOptions& opt, RngStream& rng);
// Density (2/pi) sin^2 on (0, pi) and its distribution function.
double sample_root_angle(RngStream& rng);
double root_angle_cdf(double theta);

// Windows truncate the loop measure. A box is an axis-aligned rectangle; a
// stadium is {z in H : dist(z, [0, i height]) < base_radius + sqrt(k t)}, which
// depends on the loop duration t.
struct BoxRegion {
    double x0, y0, x1, y1;
};
struct StadiumRegion {
    double height;
    double base_radius;
    double k;
};

struct Window {
    std::variant<BoxRegion, StadiumRegion> region;
    double t_min;
    double t_max;
};

void validate_window(const Window& w);
double window_mass(const Window& w);

struct RootDraw {
    Complex z;
    double t;
};
RootDraw sample_window_root(const Window& w, RngStream& rng);

// Working representation of a sampled path (no invariants checked).
struct PathBuffer {
    std::vector<double> t;
    std::vector<Complex> z;
};

struct RefineSpec {
    // Called for segments longer than dt_min; true requests a midpoint.
    std::function<bool(Complex, Complex, double)> need;
    double dt_min = 4e-6;
    // Abort (return false) as soon as a new sample falls outside.
    const Domain* reject_outside = nullptr;
    // Draw midpoints from the bridge conditioned to stay inside this domain
    // (for paths whose containment has already been decided).
    const Domain* conditioned_inside = nullptr;
};

// Levy midpoint refinement, depth first, segment by segment.
bool refine_path(PathBuffer& path, const RefineSpec& spec, RngStream& rng);

// Segment predicate: the bridge over [a, b] may come within sigma sqrt(dt) of
// the set whose distance function is given.
std::function<bool(Complex, Complex, double)> near_set(std::function<double(Complex)> distance, double sigma = 3.0);

// Decides, segment by segment with the exact half-plane crossing probability
// applied to the domain's signed distance, whether the continuous path stays
// in the domain.
bool stays_inside(const PathBuffer& path, const Domain& d, RngStream& rng);

struct LoopSamplingOptions {
    int base_steps = 32;
    std::optional<Domain> restrict_to;
    std::function<double(Complex)> focus_distance; // refine near this set
    double dt_fine = 4e-6;
    double sigma = 3.0;
};

// Loop rooted at the draw; nullopt if it leaves restrict_to.
std::optional<Loop> sample_window_loop(const RootDraw& root, const LoopSamplingOptions& opt, RngStream& rng);

struct MeasureSample {
    UnrootedLoop loop;
    double weight;         // 1 for normalized-law samples
    double mass_of_window; // loop-measure mass of the window before restriction
    std::uint64_t attempts;
};

MeasureSample sample_loop_measure_window(const Window& w, int n, RngStream& rng,
                                         const std::optional<Domain>& restrict_to = std::nullopt);

} // namespace loopsoup
