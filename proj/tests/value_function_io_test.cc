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

#include <cstring>

#include <gtest/gtest.h>

#include "test_support.h"

namespace metaplan {
namespace {

// Bitwise reflected CRC-32 (polynomial 0xEDB88320), independent of zlib.
std::uint32_t ReferenceCrc32(const std::uint8_t* data, std::size_t n) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc ^= data[i];
    for (int b = 0; b < 8; ++b) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

void Reseal(std::vector<std::uint8_t>* bytes) {
  const std::size_t body = bytes->size() - 4;
  const std::uint32_t crc = ReferenceCrc32(bytes->data(), body);
  for (int k = 0; k < 4; ++k) (*bytes)[body + k] = (crc >> (8 * k)) & 0xFF;
}

const ValueFunction2D& Sample() {
  return *testing::CoarseSuite().precomputed.tables.teb[1][2];
}

TEST(ValueFunctionIoTest, TrailerIsStandardCrc32) {
  const std::vector<std::uint8_t> bytes = SerializeValueFunction(Sample());
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(stored, ReferenceCrc32(bytes.data(), bytes.size() - 4));
  EXPECT_EQ(std::memcmp(bytes.data(), "MPVF", 4), 0);
  const std::size_t header = 4 + 4 + 4 + 32 + 8 + 48 + 8 + 8 + 4;
  EXPECT_EQ(bytes.size(),
            header + 8u * Sample().grid.nr * Sample().grid.nv + 4u);
}

TEST(ValueFunctionIoTest, RoundTripIsExact) {
  const ValueFunction2D& vf = Sample();
  const ValueFunction2D back =
      DeserializeValueFunction(SerializeValueFunction(vf), vf.params);
  EXPECT_EQ(back.grid, vf.grid);
  EXPECT_EQ(back.kind, vf.kind);
  EXPECT_EQ(back.params, vf.params);
  EXPECT_EQ(back.level, vf.level);
  EXPECT_EQ(back.horizon, vf.horizon);
  EXPECT_EQ(back.converged, vf.converged);
  EXPECT_TRUE((back.values.array() == vf.values.array()).all());
  EXPECT_TRUE((back.grad_r.array() == vf.grad_r.array()).all());
  EXPECT_EQ(SerializeValueFunction(back), SerializeValueFunction(vf));
}

TEST(ValueFunctionIoTest, FileRoundTrip) {
  const auto dir = testing::TempDir("vfio");
  SaveValueFunction(Sample(), dir / "a.bin");
  const ValueFunction2D back = LoadValueFunction(dir / "a.bin");
  EXPECT_EQ(SerializeValueFunction(back), SerializeValueFunction(Sample()));
  EXPECT_THROW(LoadValueFunction(dir / "missing.bin"), ValueFileError);
}

TEST(ValueFunctionIoTest, CorruptionIsDetected) {
  const std::vector<std::uint8_t> good = SerializeValueFunction(Sample());
  for (std::size_t pos : {std::size_t{0}, std::size_t{20}, good.size() / 2,
                          good.size() - 1}) {
    std::vector<std::uint8_t> bad = good;
    bad[pos] ^= 0x40;
    EXPECT_THROW(DeserializeValueFunction(bad), ValueFileError) << pos;
  }
  std::vector<std::uint8_t> cut(good.begin(), good.end() - 100);
  EXPECT_THROW(DeserializeValueFunction(cut), ValueFileError);
  EXPECT_THROW(DeserializeValueFunction({1, 2, 3}), ValueFileError);
}

TEST(ValueFunctionIoTest, ResealedHeaderDamageIsStillRejected) {
  const std::vector<std::uint8_t> good = SerializeValueFunction(Sample());
  std::vector<std::uint8_t> magic = good;
  magic[0] = 'X';
  Reseal(&magic);
  EXPECT_THROW(DeserializeValueFunction(magic), ValueFileError);
  std::vector<std::uint8_t> version = good;
  version[4] = 99;
  Reseal(&version);
  EXPECT_THROW(DeserializeValueFunction(version), ValueFileError);
  std::vector<std::uint8_t> kind = good;
  kind[8] = 7;
  Reseal(&kind);
  EXPECT_THROW(DeserializeValueFunction(kind), ValueFileError);
  std::vector<std::uint8_t> longer = good;
  longer.insert(longer.end() - 4, {0, 0, 0, 0, 0, 0, 0, 0});
  Reseal(&longer);
  EXPECT_THROW(DeserializeValueFunction(longer), ValueFileError);
}

TEST(ValueFunctionIoTest, ParameterMismatchIsRejected) {
  Subsystem2Params other = Sample().params;
  other.b_max += 0.1;
  EXPECT_THROW(DeserializeValueFunction(SerializeValueFunction(Sample()), other),
               ValueFileError);
}

}  // namespace
}  // namespace metaplan
