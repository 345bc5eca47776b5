#pragma once

#include <array>
#include <cstdint>

namespace fbmclt {

// Counter-based generator (Philox4x32-10). A stream is a pure function of
// (seed, stream id, position), so replica k can be regenerated on any thread
// in any order and the draw sequence is identical. This is what makes every
// Monte Carlo result here independent of the thread count.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(stream_id)),
          ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    std::uint64_t next_u64() noexcept;

    // uniform on (0,1]; never returns 0 so log() is safe
    double next_uniform() noexcept;

    // Box-Muller pair of independent standard normals
    void next_gaussian_pair(double& z0, double& z1) noexcept;
    double next_gaussian() noexcept;

    // one raw 4x32 block at an explicit block counter (for known-answer tests)
    std::array<std::uint32_t, 4> block(std::uint64_t counter) const noexcept;

  private:
    void refill_() noexcept;

    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0; // unread u32 words left in buf_
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Substream layout: high 16 bits tag the pipeline stage, low 48 bits index
// the replica/block. Keeps independent experiment stages on disjoint streams
// of the same master seed.
constexpr std::uint64_t substream(std::uint32_t stage, std::uint64_t index) noexcept {
    return (static_cast<std::uint64_t>(stage) << 48) | (index & 0xFFFFFFFFFFFFULL);
}

} // namespace fbmclt
