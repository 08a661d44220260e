// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "pgsc/numeric.hpp"

namespace pgsc {

/// SplitMix64 finalizer. Used to derive sub-stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not, so uniform and Gaussian
/// variates are produced here from raw engine words (53-bit uniforms and the
/// Marsaglia polar method). A stream is exclusive-use: give each worker its
/// own stream via split().
///
/// split(tag) depends only on the stream's seed and the tag, never on how
/// many samples have been drawn, so sub-streams are stable across code
/// changes in unrelated modules.
class SeededRng {
   public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const noexcept { return seed_; }

    SeededRng split(std::string_view tag) const;
    SeededRng split(std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n);
    double normal();

   private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives a sub-stream seed from (seed, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

/// i.i.d. circularly-symmetric complex Gaussian entries with total variance
/// `variance` (variance/2 per real and imaginary part).
ComplexMatrix sample_cn(SeededRng& rng, std::size_t rows, std::size_t cols, Real variance);

/// i.i.d. N(0, stddev^2) entries.
RealMatrix sample_normal(SeededRng& rng, std::size_t rows, std::size_t cols, Real stddev);

}  // namespace pgsc
