// Copyright 2026 The AgriSynth Authors. All Rights Reserved.
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

#include <cstddef>
#include <cstdint>
#include <utility>
#include <initializer_list>
#include <string_view>

namespace agrisynth {

// Seed derivation is hand-rolled so that derived seeds are identical across
// standard library implementations.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Mixes a base seed with an ordered list of stream indices.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> streams) {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t v : streams) s = splitmix64(s ^ splitmix64(v + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Per-item seed keyed by a string identifier (scene ids).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
  return derive_seed(base, {fnv1a64(key)});
}

/// Small portable PRNG for shuffles and parameter draws.
class SplitMixRng {
 public:
  explicit constexpr SplitMixRng(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    const std::uint64_t s = state_;
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64(s);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
  }

  /// Uniform double in [0, 1).
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Fisher-Yates over any random-access range.
  template <typename Range>
  constexpr void shuffle(Range& range) {
    for (std::size_t i = range.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(range[i - 1], range[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Torch generators take signed-range seeds; keep the top bit clear.
constexpr std::uint64_t torch_seed(std::uint64_t s) { return s & 0x7FFFFFFFFFFFFFFFULL; }

}  // namespace agrisynth
