#include "sldp/rng.hpp"

#include <cmath>
#include <numbers>

namespace sldp {

namespace {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline void round_once(Philox4x32::Counter& c, const Philox4x32::Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// 53-bit uniform in the open interval (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter counter, Key key) noexcept {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        round_once(counter, key);
    }
    return counter;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::array<double, 2> CounterRng::uniform2(std::uint64_t stream, std::uint32_t index,
                                           std::uint32_t block) const noexcept {
    const Philox4x32::Counter ctr{index, block, static_cast<std::uint32_t>(stream),
                                  static_cast<std::uint32_t>(stream >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_),
                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = Philox4x32::apply(ctr, key);
    return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

std::array<double, 2> CounterRng::normal2(std::uint64_t stream, std::uint32_t index,
                                          std::uint32_t block) const noexcept {
    const auto [u1, u2] = uniform2(stream, index, block);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

void CounterRng::normals(std::uint64_t stream, std::uint32_t index,
                         std::span<double> out) const noexcept {
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const auto z = normal2(stream, index, static_cast<std::uint32_t>(i / 2));
        out[i] = z[0];
        if (i + 1 < out.size()) out[i + 1] = z[1];
    }
}

void CounterRng::uniforms(std::uint64_t stream, std::uint32_t index,
                          std::span<double> out) const noexcept {
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const auto u = uniform2(stream, index, static_cast<std::uint32_t>(i / 2));
        out[i] = u[0];
        if (i + 1 < out.size()) out[i + 1] = u[1];
    }
}

}  // namespace sldp
