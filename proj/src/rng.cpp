#include "wabc/rng.hpp"

namespace wabc {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t label(std::string_view name) noexcept
{
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(h);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = mix64(root);
    for (auto p : path) {
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return h;
}

}  // namespace wabc
