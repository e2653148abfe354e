#pragma once

#include "loopsoup/capacity.hpp"
#include "loopsoup/soups.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace loopsoup {

struct DiscoverOptions {
    double delta_hit = 0.004;
    // Bubbles with a sampled radius at least this large get the segments that
    // may carry the maximum refined down to dt_radius; on each of those the
    // maximum of |g| is then drawn from the linearized bridge.
    double refine_radius_above = 0.0;
    double dt_radius = 1e-4;
    double sigma = 3.0;
    // Second, finer look at a hit: the loop is bridged down to dt_hit near
    // eta[0, T] and the hit is searched again with tolerance 2 sqrt(dt_hit).
    // Snapping a sample at distance delta onto the tip shortens the bubble by
    // roughly delta^0.8 in relative duration. 0 keeps the first look.
    double dt_hit = 0.0;
    // Reporting threshold: loops whose sampled image stays below
    // 0.9 * min_radius are dropped before the time change is computed, and
    // discoveries with radius below min_radius are not returned.
    double min_radius = 0.0;
};

struct Discovery {
    double r;              // capacity time of the first hit
    std::uint64_t loop_id; // id in the soup
    Loop loop;             // rerooted at eta(r)
    Curve bubble;          // g_r(loop), a loop at 0 in H
    double bubble_radius;  // max |g| over the continuous path
    double root_angle;     // argument of the bubble's farthest sample
    double snap;           // distance the hit sample was moved onto eta(r)
    bool near_double_hit = false;
};

// Least r <= T at which the delta-neighbourhood of eta[0, r] meets a segment
// of the loop, with the index of that segment. A near-double hit is a second
// contact on a non-adjacent segment, more than 2 delta from the first, whose
// trace point lies within delta of eta(r): at this resolution the first hit
// point is ambiguous. It is reported, not resolved.
struct Hit {
    Contact contact;
    std::size_t segment;
    std::optional<Contact> near_double;
};
std::optional<Hit> first_hit(const CapacityCurve& eta, double T, const Loop& l, double delta_hit);
std::optional<double> first_hit_time(const CapacityCurve& eta, double T, const UnrootedLoop& l, double delta_hit);

// Single loop, with its refinement stream.
std::optional<Discovery> discover_loop(const CapacityCurve& eta, double T, const SoupLoop& item, const Domain& soup_domain,
                                       const DiscoverOptions& opt, RngStream rng);

// Sorted by r, ties by loop id.
std::vector<Discovery> discover(const CapacityCurve& eta, double T, const LoopSoup& soup, const DiscoverOptions& opt,
                                int threads = 1);

// Standard soup setup for a curve of height h: stadium window around [0, ih]
// restricted to H, refined near the trace.
struct LoopAddSetup {
    double lambda = 1.0;
    double T = 1.0;
    double rho = 1.0;
    double dt_fine = 4e-6;
    double t_min = 0.0; // 0: 0.004 rho^2
    double t_max = 0.0; // 0: 1000 rho^2
    double k = 16.0;
    int base_steps = 32;
    double window_scale = 1.0; // spatial factor on the stadium; t_max scales with it
};

struct LoopAddRun {
    Window window;
    LoopSamplingOptions sampling;
    DiscoverOptions discover;
};

LoopAddRun make_loop_add_run(const CapacityCurve& eta, const LoopAddSetup& s);

// One soup of the run, stream (seed, index), with its discoveries of radius
// >= rho.
std::vector<Discovery> run_soup(const CapacityCurve& eta, const LoopAddSetup& s, const LoopAddRun& run,
                                std::uint64_t seed, std::uint64_t index, int threads = 1);

struct WindowCheck {
    double mean;
    double mean_doubled;
    double z;
    std::uint64_t soups;
};

// Reruns with the window doubled in space and t_max; throws WindowTooSmall if
// the mean count of discoveries with radius >= rho moves by more than 3 sigma.
WindowCheck check_window_sufficiency(const CapacityCurve& eta, const LoopAddSetup& s, std::uint64_t soups,
                                     std::uint64_t seed, int threads = 1);

class LoopAddedPath {
public:
    LoopAddedPath(std::vector<double> jump_r, std::vector<double> jump_t, Curve trace, double eta_clock);

    // Loop clock: sums of loop durations with r_j < r and r_j <= r.
    double S_minus(double r) const;
    double S_plus(double r) const;
    double total_loop_time() const;
    double eta_clock() const { return eta_clock_; }
    const std::vector<double>& jump_times() const { return jump_r_; }
    const std::vector<double>& jump_sizes() const { return jump_t_; }
    const Curve& trace() const { return trace_; }

private:
    std::vector<double> jump_r_, jump_t_, cumulative_;
    Curve trace_;
    double eta_clock_;
};

// eta runs on its capacity clock between jumps (sampled every dr), each
// discovered loop is traversed in full at r_j.
LoopAddedPath build_loop_added_path(const CapacityCurve& eta, double T, const std::vector<Discovery>& discoveries,
                                    double dr = 1.0 / 256.0);

double total_loop_time(const std::vector<Discovery>& discoveries);
double total_loop_time(const CapacityCurve& eta, double T, const LoopSoup& soup, const DiscoverOptions& opt);

// phi_t = g_{s'} o Phi_R o f_t for the slit and D = R D+, fixing 0.
ConformalMap slit_halfdisk_phi(double R, double t);
double slit_halfdisk_schwarzian(double R, double t);
// int_0^T S_{phi_t}(0) dt, Gauss-Legendre on the sqrt(t) scale.
double schwarzian_escape_integral(double R, double T);

struct NonEscape {
    double frequency;
    double std_error;
    std::uint64_t soups;
    double predicted; // exp(lambda / 6 int S)
};

// Frequency over soups that no loop hitting eta[0, T] leaves D = R D+
// (R = inf: D = H).
NonEscape non_escape_check(const LoopAddSetup& s, double R, std::uint64_t soups, std::uint64_t seed, int threads = 1);
bool loop_escapes(const Loop& l, const Domain& d, double dt_fine, RngStream rng);

json discovery_to_json(const Discovery& d);
void write_discoveries_ndjson(std::ostream& os, const json& header, const std::vector<Discovery>& d);

} // namespace loopsoup
