// Copyright 2026 The metaplan Authors
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


#include "metaplan/value_function_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace metaplan {
namespace {

constexpr char kMagic[4] = {'M', 'P', 'V', 'F'};

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void U32(std::uint32_t x) {
    for (int k = 0; k < 4; ++k) out_.push_back((x >> (8 * k)) & 0xff);
  }
  void I32(std::int32_t x) { U32(static_cast<std::uint32_t>(x)); }
  void F64(double x) {
    const auto u = std::bit_cast<std::uint64_t>(x);
    for (int k = 0; k < 8; ++k) out_.push_back((u >> (8 * k)) & 0xff);
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  void Need(std::size_t n) const {
    if (pos_ + n > size_) throw ValueFileError("value file truncated");
  }
  void Bytes(void* p, std::size_t n) {
    Need(n);
    std::memcpy(p, data_ + pos_, n);
    pos_ += n;
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t x = 0;
    for (int k = 0; k < 4; ++k) {
      x |= static_cast<std::uint32_t>(data_[pos_ + k]) << (8 * k);
    }
    pos_ += 4;
    return x;
  }
  std::int32_t I32() { return static_cast<std::int32_t>(U32()); }
  double F64() {
    Need(8);
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) {
      u |= static_cast<std::uint64_t>(data_[pos_ + k]) << (8 * k);
    }
    pos_ += 8;
    return std::bit_cast<double>(u);
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      crc32(crc, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> SerializeValueFunction(const ValueFunction2D& vf) {
  const Grid2& g = vf.grid;
  if (vf.values.rows() != g.nr || vf.values.cols() != g.nv) {
    throw std::invalid_argument("value array does not match its grid");
  }
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(kValueFileVersion);
  w.U32(static_cast<std::uint32_t>(vf.kind));
  w.F64(g.r_min);
  w.F64(g.r_max);
  w.F64(g.v_min);
  w.F64(g.v_max);
  w.I32(g.nr);
  w.I32(g.nv);
  const Subsystem2Params& p = vf.params;
  for (double x : {p.accel_min, p.accel_max, p.b_max, p.dv_max, p.da_max,
                   p.gravity_offset}) {
    w.F64(x);
  }
  w.F64(vf.level);
  w.F64(vf.horizon);
  w.U32(vf.converged ? 1 : 0);
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nv; ++j) w.F64(vf.values(i, j));
  }
  std::vector<std::uint8_t>& out = w.bytes();
  w.U32(Crc32(out.data(), out.size()));
  return out;
}

ValueFunction2D DeserializeValueFunction(
    const std::vector<std::uint8_t>& bytes,
    const std::optional<Subsystem2Params>& expected) {
  if (bytes.size() < 8) throw ValueFileError("value file truncated");
  const std::size_t body = bytes.size() - 4;
  Reader trailer(bytes.data() + body, 4);
  if (trailer.U32() != Crc32(bytes.data(), body)) {
    throw ValueFileError("value file checksum mismatch");
  }
  Reader r(bytes.data(), body);
  char magic[4];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValueFileError("not a value-function file");
  }
  const std::uint32_t version = r.U32();
  if (version != kValueFileVersion) {
    throw ValueFileError("unsupported value file version " +
                         std::to_string(version));
  }
  ValueFunction2D vf;
  const std::uint32_t kind = r.U32();
  if (kind != static_cast<std::uint32_t>(ValueKind::kInvariant) &&
      kind != static_cast<std::uint32_t>(ValueKind::kBrt)) {
    throw ValueFileError("unknown value kind " + std::to_string(kind));
  }
  vf.kind = static_cast<ValueKind>(kind);
  const double r_min = r.F64();
  const double r_max = r.F64();
  const double v_min = r.F64();
  const double v_max = r.F64();
  const int nr = r.I32();
  const int nv = r.I32();
  try {
    vf.grid = Grid2::Create(r_min, r_max, v_min, v_max, nr, nv);
  } catch (const std::invalid_argument& e) {
    throw ValueFileError(std::string("bad grid in value file: ") + e.what());
  }
  Subsystem2Params& p = vf.params;
  p.accel_min = r.F64();
  p.accel_max = r.F64();
  p.b_max = r.F64();
  p.dv_max = r.F64();
  p.da_max = r.F64();
  p.gravity_offset = r.F64();
  vf.level = r.F64();
  vf.horizon = r.F64();
  vf.converged = r.U32() != 0;
  r.Need(static_cast<std::size_t>(nr) * nv * 8);
  vf.values.resize(nr, nv);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nv; ++j) vf.values(i, j) = r.F64();
  }
  if (r.pos() != body) throw ValueFileError("trailing bytes in value file");
  if (expected && !(*expected == p)) {
    throw ValueFileError(
        "value file was computed for different subsystem parameters");
  }
  vf.ComputeGradients();
  return vf;
}

void SaveValueFunction(const ValueFunction2D& vf,
                       const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = SerializeValueFunction(vf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValueFileError("cannot write " + path.string());
}

ValueFunction2D LoadValueFunction(
    const std::filesystem::path& path,
    const std::optional<Subsystem2Params>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueFileError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DeserializeValueFunction(bytes, expected);
}

}  // namespace metaplan
