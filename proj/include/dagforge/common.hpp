#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dagforge {

// Thrown when an optimization or factorization leaves the realm of finite
// numbers (diverged training, unfactorizable kernel at the jitter cap, ...).
// The CLI maps this to a dedicated exit code so scripted sweeps can tell
// numeric blow-ups apart from bad input.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Good enough to decorrelate small structured inputs
// (seed, run index) into independent-looking generator seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-run seed for sweep cell `index` under a master seed. Runs must be
// reproducible independently of execution order, so each cell hashes its own
// seed instead of sharing one generator stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// FNV-1a over raw bytes; used to fingerprint datasets in run manifests.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace dagforge
