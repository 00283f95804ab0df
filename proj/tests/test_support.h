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


#ifndef METAPLAN_TESTS_TEST_SUPPORT_H_
#define METAPLAN_TESTS_TEST_SUPPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "metaplan/config.h"
#include "metaplan/pipeline.h"
#include "metaplan/reachability.h"

namespace metaplan::testing {

// Three-planner suite on a 101 x 101 grid, solved once per process.
RunConfig CoarseConfig();
const SolvedSuite& CoarseSuite();

// Symmetric Hausdorff distance in grid cells (r scaled by dr, v by dv).
double HausdorffCells(const std::vector<Eigen::Vector2d>& a,
                      const std::vector<Eigen::Vector2d>& b, const Grid2& grid);

// Fresh empty directory under the system temp dir.
std::filesystem::path TempDir(const std::string& name);

std::string ReadBytes(const std::filesystem::path& path);

}  // namespace metaplan::testing

#endif  // METAPLAN_TESTS_TEST_SUPPORT_H_
