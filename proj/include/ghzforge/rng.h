// Copyright 2026 The ghzforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GHZFORGE_RNG_H_
#define GHZFORGE_RNG_H_

#include <cstdint>
#include <limits>

namespace ghzforge {

/// SplitMix64 output function. Used only for seeding and stream derivation.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent stream families. Values are part of the on-disk determinism
/// contract; never renumber.
enum class Stream : uint64_t {
    kTrial = 1,
    kShot = 2,
    kLabels = 3,
    kCalibration = 4,
    kSweep = 5,
    kTwirl = 6,
};

/// Seed of substream `index` in family `stream` under the run seed `base`.
///
/// seed = splitmix64(splitmix64(base ^ splitmix64(stream)) + index)
///
/// Each trial, shot or sweep point gets its own substream so any single one
/// can be replayed without running the others.
constexpr uint64_t derive_seed(uint64_t base, Stream stream, uint64_t index) {
    return splitmix64(splitmix64(base ^ splitmix64(static_cast<uint64_t>(stream))) + index);
}

/// xoshiro256** (Blackman & Vigna), seeded through SplitMix64.
///
/// Chosen over std::mt19937_64 because every shot owns a substream and the
/// 2.5 KB Mersenne state makes per-shot reseeding dominate sampling cost.
/// Satisfies UniformRandomBitGenerator.
class Rng {
   public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto &w : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            w = z ^ (z >> 31);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). n must be positive.
    uint64_t below(uint64_t n) {
        const uint64_t limit = max() - max() % n;
        uint64_t v;
        do {
            v = (*this)();
        } while (v >= limit);
        return v % n;
    }

   private:
    static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
};

}  // namespace ghzforge

#endif  // GHZFORGE_RNG_H_
