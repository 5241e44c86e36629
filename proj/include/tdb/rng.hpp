#pragma once

#include <array>
#include <cstdint>

namespace tdb {

// Philox4x32-10 counter-based generator. Every variate is addressed by
// (stream, index), so ensembles come out identical for any thread count or
// evaluation order.
class Philox {
public:
    explicit Philox(std::uint64_t seed) : k0_(static_cast<std::uint32_t>(seed)), k1_(static_cast<std::uint32_t>(seed >> 32)) {}

    std::array<std::uint32_t, 4> block(std::uint64_t stream, std::uint64_t counter) const;

    // uniform on (0, 1]
    double uniform(std::uint64_t stream, std::uint64_t index) const;

    // standard normal via Box-Muller on a counter pair
    double normal(std::uint64_t stream, std::uint64_t index) const;

private:
    std::uint32_t k0_;
    std::uint32_t k1_;
};

// fixed stream ids so independent consumers never collide
namespace rng_stream {
inline constexpr std::uint64_t initial_condition = 1;
inline constexpr std::uint64_t boundary = 2;
inline constexpr std::uint64_t subspace_start = 3;
inline constexpr std::uint64_t test = 1000;
}  // namespace rng_stream

}  // namespace tdb
