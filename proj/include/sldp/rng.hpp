#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sldp {

/// Philox4x32-10 counter-based generator. Output is a pure function of
/// (counter, key), so any draw can be regenerated from its coordinates
/// without advancing shared state.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter counter, Key key) noexcept;
};

/// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic draws addressed by (seed, stream, index, block).
///
/// `stream` is typically a path index, `index` a time step. Each block yields
/// two uniforms or two standard normals.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Two uniforms in (0, 1), 53-bit resolution.
    std::array<double, 2> uniform2(std::uint64_t stream, std::uint32_t index,
                                   std::uint32_t block) const noexcept;
    /// Two independent standard normals (Box-Muller on uniform2).
    std::array<double, 2> normal2(std::uint64_t stream, std::uint32_t index,
                                  std::uint32_t block) const noexcept;
    /// Fills `out` with standard normals for one (stream, index) address.
    void normals(std::uint64_t stream, std::uint32_t index, std::span<double> out) const noexcept;
    /// Fills `out` with uniforms in (0, 1) for one (stream, index) address.
    void uniforms(std::uint64_t stream, std::uint32_t index, std::span<double> out) const noexcept;

private:
    std::uint64_t seed_;
};

}  // namespace sldp
