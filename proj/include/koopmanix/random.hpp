// Copyright 2026 The Koopmanix Authors
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

#ifndef KOOPMANIX_RANDOM_HPP
#define KOOPMANIX_RANDOM_HPP

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace koopmanix {

/// Seeded generator whose output sequence is fixed by the seed alone.
/// std::mt19937_64 is fully specified by the standard; the distributions
/// below are written out so that draws do not depend on the library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    const double u = lo + (hi - lo) * uniform();
    return u < hi ? u : lo;
  }

  /// Uniform integer on [0, n), n > 0, without modulo bias.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw = next();
    while (draw >= limit) draw = next();
    return draw % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  /// Derives an independent stream for a sub-task.
  Rng fork(std::uint64_t salt) {
    return Rng(next() ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace koopmanix

#endif  // KOOPMANIX_RANDOM_HPP
