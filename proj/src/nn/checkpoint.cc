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

#include "commcorr/nn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "CCORRCKP";

template <typename T>
void Append(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

void ByteWriter::U32(uint32_t v) { Append(bytes_, v); }
void ByteWriter::U64(uint64_t v) { Append(bytes_, v); }
void ByteWriter::I64(int64_t v) { Append(bytes_, v); }
void ByteWriter::F64(double v) { Append(bytes_, v); }

void ByteWriter::Str(std::string_view s) {
  U64(s.size());
  bytes_.append(s);
}

void ByteWriter::F64s(std::span<const double> v) {
  U64(v.size());
  for (double x : v) F64(x);
}

void ByteWriter::Mat(const Matrix& m) {
  U32(static_cast<uint32_t>(m.rows()));
  U32(static_cast<uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) F64(m(r, c));
  }
}

void ByteReader::Need(size_t n) const {
  if (bytes_.size() - pos_ < n) {
    throw std::runtime_error(fmt::format(
        "checkpoint truncated: need {} bytes at offset {}, {} left", n, pos_,
        bytes_.size() - pos_));
  }
}

#define COMMCORR_READ_POD(T)                         \
  Need(sizeof(T));                                   \
  T v;                                               \
  std::memcpy(&v, bytes_.data() + pos_, sizeof(T));  \
  pos_ += sizeof(T);                                 \
  return v

uint32_t ByteReader::U32() { COMMCORR_READ_POD(uint32_t); }
uint64_t ByteReader::U64() { COMMCORR_READ_POD(uint64_t); }
int64_t ByteReader::I64() { COMMCORR_READ_POD(int64_t); }
double ByteReader::F64() { COMMCORR_READ_POD(double); }

#undef COMMCORR_READ_POD

std::string ByteReader::Raw(uint64_t n) {
  Need(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

std::string ByteReader::Str() { return Raw(U64()); }

std::vector<double> ByteReader::F64s() {
  const uint64_t n = U64();
  Need(n * sizeof(double));
  std::vector<double> v(n);
  for (auto& x : v) x = F64();
  return v;
}

Matrix ByteReader::Mat() {
  const uint32_t rows = U32();
  const uint32_t cols = U32();
  Need(static_cast<size_t>(rows) * cols * sizeof(double));
  Matrix m(rows, cols);
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < cols; ++c) m(r, c) = F64();
  }
  return m;
}

void CheckpointContainer::Put(std::string name, std::string payload) {
  for (auto& [n, p] : sections_) {
    if (n == name) {
      p = std::move(payload);
      return;
    }
  }
  sections_.emplace_back(std::move(name), std::move(payload));
}

bool CheckpointContainer::Has(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.first == name) return true;
  }
  return false;
}

const std::string& CheckpointContainer::Get(std::string_view name) const {
  for (const auto& s : sections_) {
    if (s.first == name) return s.second;
  }
  throw std::runtime_error(fmt::format("checkpoint has no section '{}'", name));
}

std::string CheckpointContainer::Serialize() const {
  std::string out(kMagic);
  Append(out, kCheckpointVersion);
  Append(out, static_cast<uint32_t>(sections_.size()));
  for (const auto& [name, payload] : sections_) {
    Append(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    Append(out, static_cast<uint64_t>(payload.size()));
    out.append(payload);
  }
  return out;
}

CheckpointContainer CheckpointContainer::Parse(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  ByteReader r(bytes.substr(kMagic.size()));
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error(fmt::format(
        "unsupported checkpoint version {} (this build reads {})", version,
        kCheckpointVersion));
  }
  const uint32_t count = r.U32();
  CheckpointContainer c;
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = r.U32();
    std::string name = r.Raw(name_len);
    const uint64_t payload_len = r.U64();
    c.Put(std::move(name), r.Raw(payload_len));
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return c;
}

void CheckpointContainer::Save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    const std::string data = Serialize();
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move " + tmp + " to " + path);
  }
}

CheckpointContainer CheckpointContainer::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return Parse(data);
}

void WriteMLP(ByteWriter& w, const MLPParams& p) {
  p.Validate();
  w.U32(p.activation == Activation::kRelu ? 0 : 1);
  w.U32(static_cast<uint32_t>(p.layer_sizes.size()));
  for (int s : p.layer_sizes) w.U64(static_cast<uint64_t>(s));
  for (const Layer& l : p.layers) {
    w.Mat(l.weight);
    w.Mat(l.bias);
  }
}

MLPParams ReadMLP(ByteReader& r) {
  const uint32_t act = r.U32();
  if (act > 1) throw std::runtime_error("checkpoint: unknown activation tag");
  const uint32_t n = r.U32();
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(r.U64());
  MLPParams p;
  p.layer_sizes = sizes;
  p.activation = act == 0 ? Activation::kRelu : Activation::kTanh;
  for (uint32_t l = 0; l + 1 < n; ++l) {
    Layer layer;
    layer.weight = r.Mat();
    layer.bias = r.Mat();
    p.layers.push_back(std::move(layer));
  }
  p.Validate();
  return p;
}

void WriteAdam(ByteWriter& w, const AdamState& s) {
  w.F64(s.config.lr);
  w.F64(s.config.beta1);
  w.F64(s.config.beta2);
  w.F64(s.config.eps);
  w.I64(s.step);
  WriteMLP(w, s.first_moment);
  WriteMLP(w, s.second_moment);
}

AdamState ReadAdam(ByteReader& r) {
  AdamState s;
  s.config.lr = r.F64();
  s.config.beta1 = r.F64();
  s.config.beta2 = r.F64();
  s.config.eps = r.F64();
  s.step = r.I64();
  s.first_moment = ReadMLP(r);
  s.second_moment = ReadMLP(r);
  return s;
}

}  // namespace commcorr::nn
