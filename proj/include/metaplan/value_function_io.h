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


#ifndef METAPLAN_VALUE_FUNCTION_IO_H_
#define METAPLAN_VALUE_FUNCTION_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "metaplan/reachability.h"

namespace metaplan {

// On-disk layout, all little-endian:
//
//   char[4]  magic "MPVF"
//   u32      format version
//   u32      kind (ValueKind)
//   f64 x4   r_min, r_max, v_min, v_max
//   i32 x2   nr, nv
//   f64 x6   accel_min, accel_max, b_max, dv_max, da_max, gravity_offset
//   f64      level
//   f64      horizon
//   u32      converged (0 or 1)
//   f64 x nr*nv  values, row-major in r
//   u32      CRC-32 of every preceding byte
inline constexpr std::uint32_t kValueFileVersion = 1;

class ValueFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> SerializeValueFunction(const ValueFunction2D& vf);

// Throws ValueFileError on bad magic, version, size or checksum, and when
// `expected` is given and differs from the stored parameters.
ValueFunction2D DeserializeValueFunction(
    const std::vector<std::uint8_t>& bytes,
    const std::optional<Subsystem2Params>& expected = {});

void SaveValueFunction(const ValueFunction2D& vf,
                       const std::filesystem::path& path);
ValueFunction2D LoadValueFunction(
    const std::filesystem::path& path,
    const std::optional<Subsystem2Params>& expected = {});

}  // namespace metaplan

#endif  // METAPLAN_VALUE_FUNCTION_IO_H_
