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

#include "commcorr/nn/rng.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace commcorr::nn {

uint64_t MixBits(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

uint64_t HashLabel(std::string_view label) {
  // FNV-1a.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(uint64_t seed) : seed_(seed), engine_(MixBits(seed)) {}

RngStream RngStream::Fork(std::string_view label) const {
  return RngStream(MixBits(seed_ ^ HashLabel(label)));
}

RngStream RngStream::Fork(std::string_view label, uint64_t index) const {
  return RngStream(MixBits(MixBits(seed_ ^ HashLabel(label)) + index));
}

double RngStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int RngStream::UniformInt(int n) {
  if (n <= 0) throw std::invalid_argument("UniformInt: n must be positive");
  const uint64_t range = static_cast<uint64_t>(n);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int>(x % range);
}

double RngStream::Normal() {
  double u1 = Uniform();
  const double u2 = Uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string RngStream::SaveState() const {
  std::ostringstream out;
  out << seed_ << ' ' << engine_;
  return out.str();
}

void RngStream::LoadState(const std::string& state) {
  std::istringstream in(state);
  in >> seed_ >> engine_;
  if (!in) throw std::runtime_error("RngStream: malformed saved state");
}

}  // namespace commcorr::nn
