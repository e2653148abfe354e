#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace loopsoup {

// Philox4x32-10 counter-based generator. The key is the 64-bit seed, the
// upper half of the 128-bit counter is the stream id and the lower half a
// block index, so (seed, stream) pairs never share blocks.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Independent stream derived from this one's (seed, stream) and an index.
    // Does not consume from this stream.
    RngStream child(std::uint64_t index) const;

    std::uint64_t next_u64();
    result_type operator()() { return next_u64(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential();
    std::uint64_t poisson(double mean);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

} // namespace loopsoup
