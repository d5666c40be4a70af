// Copyright 2026 The qfb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).
//
// Every random stream is addressed by (seed, stream index, stage tag), so a
// Monte-Carlo shot draws the same numbers no matter which thread runs it or
// in which order shots are processed.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace qfb {

using Philox4x32Block = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 evaluation: a keyed bijection on 128-bit counters.
constexpr Philox4x32Block philox4x32(Philox4x32Block ctr, Philox4x32Key key) {
    constexpr std::uint32_t kMulA = 0xD2511F53u;
    constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

/// Stage tags keep streams of different simulation stages disjoint.
enum class StreamTag : std::uint32_t {
    kGeneric = 0,
    kReadout = 1,
    kReset = 2,
    kRepeatedInit = 3,
    kParity = 4,
    kTomography = 5,
    kQnd = 6,
    kRabi = 7,
};

/// Independent seed for sub-run `index` of a run seeded with `seed` (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform random bit generator over a single (seed, stream, tag) address.
///
/// Satisfies std::uniform_random_bit_generator. Draws are produced by
/// encrypting an incrementing block counter, four words at a time.
class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, StreamTag tag = StreamTag::kGeneric)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream),
          tag_(static_cast<std::uint32_t>(tag)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (used_ == 4) {
            refill();
        }
        return buffer_[used_++];
    }

    /// Uniform double in the open interval (0, 1) with 53 random bits.
    double uniform() {
        const std::uint64_t hi = (*this)() >> 5;  // 27 bits
        const std::uint64_t lo = (*this)() >> 6;  // 26 bits
        const std::uint64_t bits = (hi << 26) | lo;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal deviate (Box-Muller, second value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exponential waiting time; +inf for a zero rate.
    double exponential(double rate) {
        if (rate <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return -std::log(uniform()) / rate;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    void refill() {
        const Philox4x32Block ctr{static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(stream_),
                                  static_cast<std::uint32_t>(stream_ >> 32),
                                  tag_ ^ (static_cast<std::uint32_t>(block_ >> 32) << 8)};
        buffer_ = philox4x32(ctr, key_);
        ++block_;
        used_ = 0;
    }

    Philox4x32Key key_;
    std::uint64_t stream_;
    std::uint32_t tag_;
    std::uint64_t block_ = 0;
    Philox4x32Block buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qfb
