// Copyright 2026 The CommCorr Authors.
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

#ifndef COMMCORR_NN_RNG_H_
#define COMMCORR_NN_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace commcorr::nn {

// Seedable pseudo-random stream. Identical seed and call sequence give
// identical outputs. Forks depend only on the parent seed and the label, never
// on how much of the parent stream has been consumed.
class RngStream {
 public:
  explicit RngStream(uint64_t seed = 0);

  RngStream Fork(std::string_view label) const;
  RngStream Fork(std::string_view label, uint64_t index) const;

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform on [0, n).
  int UniformInt(int n);
  // Standard normal via Box-Muller; consumes two uniforms per call.
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  uint64_t seed() const { return seed_; }

  std::string SaveState() const;
  void LoadState(const std::string& state);

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; also used to derive fork seeds.
uint64_t MixBits(uint64_t x);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_RNG_H_
