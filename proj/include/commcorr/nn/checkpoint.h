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

#ifndef COMMCORR_NN_CHECKPOINT_H_
#define COMMCORR_NN_CHECKPOINT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "commcorr/nn/mlp.h"
#include "commcorr/nn/optim.h"

namespace commcorr::nn {

// Versioned checkpoint container. Layout, all integers little-endian:
//
//   magic        8 bytes  "CCORRCKP"
//   version      u32      (kCheckpointVersion)
//   count        u32      number of sections
//   sections     count x { u32 name_len, name bytes,
//                          u64 payload_len, payload bytes }
//
// Sections keep insertion order. Payload encodings are defined by the writer
// helpers below; floating-point data is stored as raw IEEE-754 binary64, so a
// save/load round trip is bit-exact.
inline constexpr uint32_t kCheckpointVersion = 1;

class ByteWriter {
 public:
  void U32(uint32_t v);
  void U64(uint64_t v);
  void I64(int64_t v);
  void F64(double v);
  void Str(std::string_view s);
  void F64s(std::span<const double> v);
  // u32 rows, u32 cols, then rows*cols f64 in row-major order.
  void Mat(const Matrix& m);

  const std::string& bytes() const { return bytes_; }
  std::string Take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  uint32_t U32();
  uint64_t U64();
  int64_t I64();
  double F64();
  std::string Str();
  std::string Raw(uint64_t n);
  std::vector<double> F64s();
  Matrix Mat();

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) const;

  std::string_view bytes_;
  size_t pos_ = 0;
};

class CheckpointContainer {
 public:
  void Put(std::string name, std::string payload);
  bool Has(std::string_view name) const;
  const std::string& Get(std::string_view name) const;
  const std::vector<std::pair<std::string, std::string>>& sections() const {
    return sections_;
  }

  std::string Serialize() const;
  static CheckpointContainer Parse(std::string_view bytes);

  void Save(const std::string& path) const;
  static CheckpointContainer Load(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> sections_;
};

// MLP payload: u32 activation (0 relu, 1 tanh), u32 n, n x u64 layer sizes,
// then per layer the weight matrix and the bias matrix (ByteWriter::Mat).
void WriteMLP(ByteWriter& w, const MLPParams& p);
MLPParams ReadMLP(ByteReader& r);

// Adam payload: f64 lr, beta1, beta2, eps; i64 step; first moment MLP;
// second moment MLP.
void WriteAdam(ByteWriter& w, const AdamState& s);
AdamState ReadAdam(ByteReader& r);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_CHECKPOINT_H_
