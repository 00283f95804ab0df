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


#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace metaplan::testing {

RunConfig CoarseConfig() {
  RunConfig c;
  c.planners = {PlannerSpeed({1.0, 1.0, 0.5}), PlannerSpeed({0.5, 0.5, 0.25}),
                PlannerSpeed({0.25, 0.25, 0.125})};
  c.grid_xy = Grid2::Create(-1.5, 1.5, -2.5, 2.5, 101, 101);
  c.grid_z = c.grid_xy;
  c.scenario.base.workspace.lo = Eigen::Vector3d(0, -5, 0);
  c.scenario.base.workspace.hi = Eigen::Vector3d(20, 5, 4);
  c.scenario.base.start = Eigen::Vector3d(1, 0, 2);
  c.scenario.base.goal = Eigen::Vector3d(19, 0, 2);
  c.scenario.base.sensing_radius = 3.5;
  return c;
}

const SolvedSuite& CoarseSuite() {
  static const SolvedSuite suite = SolveSuite(CoarseConfig());
  return suite;
}

double HausdorffCells(const std::vector<Eigen::Vector2d>& a,
                      const std::vector<Eigen::Vector2d>& b, const Grid2& grid) {
  auto directed = [&](const std::vector<Eigen::Vector2d>& from,
                      const std::vector<Eigen::Vector2d>& to) {
    double worst = 0.0;
    for (const Eigen::Vector2d& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Eigen::Vector2d& q : to) {
        const double dr = (p[0] - q[0]) / grid.dr();
        const double dv = (p[1] - q[1]) / grid.dv();
        best = std::min(best, dr * dr + dv * dv);
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

std::filesystem::path TempDir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("metaplan_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace metaplan::testing
