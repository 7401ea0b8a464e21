#pragma once

#include <cstdint>
#include <initializer_list>

namespace nrpm {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a path of indices
/// (e.g. callpath, coordinate, repetition). Order of the indices matters.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(base);
    for (std::uint64_t index : path) {
        s = mix64(s ^ mix64(index + 0x632BE59BD9B4E019ull));
    }
    return s;
}

}  // namespace nrpm
