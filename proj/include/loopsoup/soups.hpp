#pragma once

#include "loopsoup/io.hpp"
#include "loopsoup/samplers.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace loopsoup {

inline constexpr const char* kFormatVersion = "1";

struct SoupLoop {
    std::uint64_t id; // index of the draw; its randomness is stream.child(id)
    UnrootedLoop loop;
};

struct LoopSoup {
    double lambda = 1.0;
    Window window{};
    LoopSamplingOptions sampling;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t draws = 0; // Poisson count before restriction
    std::vector<SoupLoop> loops;

    double window_mass() const { return loopsoup::window_mass(window); }
    // Unbiased estimate of the restricted window mass from the acceptance ratio.
    double restricted_mass() const;
    RngStream loop_stream(std::uint64_t id, std::uint64_t purpose) const;
    const Domain& domain() const; // restrict_to or H
};

// Poisson(lambda * window mass) draws; each is kept iff it stays in
// sampling.restrict_to, so the kept count is Poisson(lambda * restricted mass).
LoopSoup sample_loop_soup(double lambda, const Window& w, const LoopSamplingOptions& sampling, const RngStream& rng,
                          int threads = 1);

struct RestrictionSplit {
    LoopSoup inside;
    std::vector<SoupLoop> crossing;
};

RestrictionSplit split_restriction(const LoopSoup& s, const Domain& d);

struct BubbleItem {
    double s; // time stamp in [0, T]
    BubbleSample bubble;
};

struct BubbleSoup {
    double lambda = 1.0;
    double horizon = 1.0;
    double r_min = 1.0;
    std::uint64_t seed = 0;
    std::vector<BubbleItem> items; // sorted by s
};

BubbleSoup sample_bubble_soup(double lambda, double T, double r_min, const HalfDiskOptions& opt, const RngStream& rng,
                              int threads = 1);

json window_to_json(const Window& w);
Window window_from_json(const json& j);
json domain_to_json(const Domain& d);

void write_soup_ndjson(std::ostream& os, const LoopSoup& s);
void write_soup_csv(std::ostream& os, const LoopSoup& s);
void write_bubble_soup_ndjson(std::ostream& os, const BubbleSoup& s);
void write_bubble_soup_csv(std::ostream& os, const BubbleSoup& s);

} // namespace loopsoup
