#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace wabc {

using Rng = std::mt19937_64;

/// Serial or OpenMP execution of the data-parallel kernels. Both produce
/// bit-identical results; the serial path is the reference.
enum class Exec { serial, parallel };

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit hash of a label, used to name substreams ("abc", "delta", ...).
std::uint64_t label(std::string_view name) noexcept;

/// Counter-based seed derivation: the same (root, path) always yields the same
/// seed, independent of the order in which substreams are requested.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> path)
{
    return Rng(derive_seed(root, path));
}

}  // namespace wabc
