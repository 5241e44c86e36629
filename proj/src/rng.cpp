#include "tdb/rng.hpp"

#include <cmath>

namespace tdb {

namespace {
inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::uint64_t stream, std::uint64_t counter) const {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t k0 = k0_, k1 = k1_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c0, hi0, lo0);
        mulhilo(kMul1, c2, hi1, lo1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
}

double Philox::uniform(std::uint64_t stream, std::uint64_t index) const {
    const auto b = block(stream, index);
    return (static_cast<double>(b[0]) + 1.0) * (1.0 / 4294967296.0);
}

double Philox::normal(std::uint64_t stream, std::uint64_t index) const {
    const auto b = block(stream, index >> 1);
    const double u1 = (static_cast<double>(b[0]) + 1.0) * (1.0 / 4294967296.0);
    const double u2 = (static_cast<double>(b[1]) + 0.5) * (1.0 / 4294967296.0);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    return (index & 1u) ? r * std::sin(a) : r * std::cos(a);
}

}  // namespace tdb
