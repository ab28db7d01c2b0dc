//
// Copyright 2026 The ReconLab Authors
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
//

#ifndef RECONLAB_RNG_H_
#define RECONLAB_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace reconlab {

// SplitMix64 finalizer. Used for every seed derivation so that stage and
// per-geography streams do not depend on evaluation order.
constexpr uint64_t Mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t HashLabel(std::string_view label) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t DeriveSeed(uint64_t parent, std::string_view label) {
  return Mix64(parent ^ Mix64(HashLabel(label)));
}

constexpr uint64_t DeriveSeed(uint64_t parent, uint64_t index) {
  return Mix64(parent ^ Mix64(index + 0x632be59bd9b4e019ULL));
}

// Pseudo-random stream with hand-written distributions. The standard library
// distributions are implementation-defined, so they are avoided to keep
// outputs identical across toolchains; mt19937_64 itself is fully specified.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n) {
    const uint64_t limit = n * (UINT64_MAX / n);
    uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool Bernoulli(double p) { return p > 0.0 && Uniform01() < p; }

  // Index drawn with probability proportional to weights; weights must have
  // a positive sum.
  size_t Categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = Uniform01() * total;
    size_t last_positive = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return last_positive;
  }

  // Two-sided geometric with P(k) proportional to alpha^|k|.
  int64_t TwoSidedGeometric(double alpha) {
    if (alpha <= 0.0) return 0;
    auto one_sided = [&]() {
      // Number of failures before a success with success prob 1 - alpha.
      const double u = 1.0 - Uniform01();
      return static_cast<int64_t>(std::floor(std::log(u) / std::log(alpha)));
    };
    // Difference of two iid geometrics has the two-sided geometric law.
    return one_sided() - one_sided();
  }

  // Discrete Gaussian N_Z(0, sigma^2) by rejection from a discrete Laplace
  // proposal with scale t = floor(sigma) + 1.
  int64_t DiscreteGaussian(double sigma) {
    if (sigma <= 0.0) return 0;
    const double t = std::floor(sigma) + 1.0;
    const double alpha = std::exp(-1.0 / t);
    const double s2 = sigma * sigma;
    while (true) {
      const int64_t y = TwoSidedGeometric(alpha);
      const double d = std::abs(static_cast<double>(y)) - s2 / t;
      if (Uniform01() < std::exp(-d * d / (2.0 * s2))) return y;
    }
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = UniformInt(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace reconlab

#endif  // RECONLAB_RNG_H_
