// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/rng.hpp"

#include <cmath>
#include <limits>

namespace pgsc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    // FNV-1a over the tag, then mixed with the parent seed.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(splitmix64(seed) ^ h);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

SeededRng SeededRng::split(std::string_view tag) const { return SeededRng(derive_seed(seed_, tag)); }

SeededRng SeededRng::split(std::uint64_t index) const {
    return SeededRng(splitmix64(splitmix64(seed_) + 0xD1B54A32D192ED03ULL * (index + 1)));
}

std::uint64_t SeededRng::next_u64() { return engine_(); }

double SeededRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double SeededRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

ComplexMatrix sample_cn(SeededRng& rng, std::size_t rows, std::size_t cols, Real variance) {
    ComplexMatrix out(rows, cols);
    if (variance <= 0.0) return out;
    const Real sd = std::sqrt(variance / 2.0);
    for (auto& v : out.data()) {
        const Real re = rng.normal();
        const Real im = rng.normal();
        v = Complex(sd * re, sd * im);
    }
    return out;
}

RealMatrix sample_normal(SeededRng& rng, std::size_t rows, std::size_t cols, Real stddev) {
    RealMatrix out(rows, cols);
    for (auto& v : out.data()) v = stddev * rng.normal();
    return out;
}

}  // namespace pgsc
