#include "fbmclt/rng.hpp"

#include <cmath>

namespace fbmclt {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::uint32_t& x0, std::uint32_t& x1, std::uint32_t& x2,
                       std::uint32_t& x3, std::uint32_t k0, std::uint32_t k1) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    x0 = hi1 ^ x1 ^ k0;
    x1 = lo1;
    x2 = hi0 ^ x3 ^ k1;
    x3 = lo0;
}

inline std::array<std::uint32_t, 4> philox10(std::uint32_t c0, std::uint32_t c1,
                                             std::uint32_t c2, std::uint32_t c3,
                                             std::uint32_t k0, std::uint32_t k1) noexcept {
    for (int r = 0; r < 10; ++r) {
        round_once(c0, c1, c2, c3, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
}

} // namespace

std::array<std::uint32_t, 4> RngStream::block(std::uint64_t counter) const noexcept {
    return philox10(static_cast<std::uint32_t>(counter),
                    static_cast<std::uint32_t>(counter >> 32), ctr2_, ctr3_, key0_, key1_);
}

void RngStream::refill_() noexcept {
    buf_ = block(block_++);
    avail_ = 4;
}

std::uint64_t RngStream::next_u64() noexcept {
    if (avail_ < 2) refill_();
    const std::uint32_t lo = buf_[4 - avail_];
    const std::uint32_t hi = buf_[4 - avail_ + 1];
    avail_ -= 2;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

double RngStream::next_uniform() noexcept {
    // 53-bit mantissa, mapped to (0,1]
    const std::uint64_t x = next_u64() >> 11;
    return (static_cast<double>(x) + 1.0) * 0x1.0p-53;
}

void RngStream::next_gaussian_pair(double& z0, double& z1) noexcept {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

double RngStream::next_gaussian() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double z0, z1;
    next_gaussian_pair(z0, z1);
    spare_ = z1;
    has_spare_ = true;
    return z0;
}

} // namespace fbmclt
