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

#include "metaplan/reachability.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace metaplan {

Grid2 Grid2::Create(double r_min, double r_max, double v_min, double v_max,
                    int nr, int nv) {
  if (!(r_min < r_max) || !(v_min < v_max)) {
    throw std::invalid_argument("grid extents must be strictly ordered");
  }
  if (nr < kMinCells || nv < kMinCells) {
    throw std::invalid_argument("grid needs at least 32 cells per axis");
  }
  return Grid2{r_min, r_max, v_min, v_max, nr, nv};
}

void ValueFunction2D::ComputeGradients() {
  const int nr = grid.nr;
  const int nv = grid.nv;
  grad_r.resize(nr, nv);
  grad_v.resize(nr, nv);
  const double dr = grid.dr();
  const double dv = grid.dv();
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nr; ++i) {
      const int il = std::max(i - 1, 0);
      const int ih = std::min(i + 1, nr - 1);
      grad_r(i, j) = (values(ih, j) - values(il, j)) / ((ih - il) * dr);
      const int jl = std::max(j - 1, 0);
      const int jh = std::min(j + 1, nv - 1);
      grad_v(i, j) = (values(i, jh) - values(i, jl)) / ((jh - jl) * dv);
    }
  }
}

double Hamiltonian(const Subsystem2Params& p, double v, double p_r,
                   double p_v) {
  return p_r * v + std::abs(p_r) * p.Drift() + std::abs(p_v) * p.da_max +
         std::min(p_v * p.accel_min, p_v * p.accel_max);
}

namespace {

// Extremum of a function with a single kink at zero over the interval
// spanned by (lo, hi): min if lo <= hi, max otherwise.
template <typename F>
double GodunovExtremum(const F& f, double lo, double hi) {
  const double a = f(lo);
  const double b = f(hi);
  if (lo <= hi) {
    double m = std::min(a, b);
    if (lo < 0.0 && hi > 0.0) m = std::min(m, f(0.0));
    return m;
  }
  double m = std::max(a, b);
  if (hi < 0.0 && lo > 0.0) m = std::max(m, f(0.0));
  return m;
}

// Fifth-order WENO reconstruction from five consecutive differences,
// ordered from the far upwind side.
double Weno5(double d1, double d2, double d3, double d4, double d5) {
  constexpr double kEps = 1e-6;
  auto sq = [](double x) { return x * x; };
  const double s1 =
      13.0 / 12.0 * sq(d1 - 2 * d2 + d3) + 0.25 * sq(d1 - 4 * d2 + 3 * d3);
  const double s2 = 13.0 / 12.0 * sq(d2 - 2 * d3 + d4) + 0.25 * sq(d2 - d4);
  const double s3 =
      13.0 / 12.0 * sq(d3 - 2 * d4 + d5) + 0.25 * sq(3 * d3 - 4 * d4 + d5);
  const double a1 = 0.1 / sq(kEps + s1);
  const double a2 = 0.6 / sq(kEps + s2);
  const double a3 = 0.3 / sq(kEps + s3);
  const double sum = a1 + a2 + a3;
  return (a1 * (d1 / 3 - 7 * d2 / 6 + 11 * d3 / 6) +
          a2 * (-d2 / 6 + 5 * d3 / 6 + d4 / 3) +
          a3 * (d3 / 3 + 5 * d4 / 6 - d5 / 6)) /
         sum;
}

// Left and right derivatives along one grid line of n samples with the
// given stride. Three ghost cells per side are filled by linear
// extrapolation.
void LineDerivatives(const double* x, int n, Eigen::Index stride, double h,
                     SpatialOrder order, std::vector<double>* work,
                     double* left, double* right) {
  std::vector<double>& g = *work;
  g.resize(n + 6);
  for (int i = 0; i < n; ++i) g[i + 3] = x[i * stride];
  for (int k = 1; k <= 3; ++k) {
    g[3 - k] = g[3] + k * (g[3] - g[4]);
    g[n + 2 + k] = g[n + 2] + k * (g[n + 2] - g[n + 1]);
  }
  // In place: g[i] becomes the difference between samples i and i + 1.
  for (int i = 0; i < n + 5; ++i) g[i] = (g[i + 1] - g[i]) / h;
  for (int i = 0; i < n; ++i) {
    const int c = i + 3;
    if (order == SpatialOrder::kFirst) {
      left[i * stride] = g[c - 1];
      right[i * stride] = g[c];
    } else {
      left[i * stride] = Weno5(g[c - 3], g[c - 2], g[c - 1], g[c], g[c + 1]);
      right[i * stride] = Weno5(g[c + 2], g[c + 1], g[c], g[c - 1], g[c - 2]);
    }
  }
}

}  // namespace

double NumericalRate(const Grid2& grid, const Subsystem2Params& params,
                     const Eigen::MatrixXd& values,
                     const SolverOptions& options, Eigen::MatrixXd* rate) {
  const int nr = grid.nr;
  const int nv = grid.nv;
  const double drift = params.Drift();
  const double alpha_v = params.MaxAccelMagnitude();
  const double a_up = params.NetAccelUp();
  const double a_dn = params.NetAccelDown();
  const double max_speed =
      std::max(std::abs(grid.v_min), std::abs(grid.v_max)) + drift;

  Eigen::MatrixXd pr_m(nr, nv), pr_p(nr, nv), pv_m(nr, nv), pv_p(nr, nv);
  std::vector<double> work;
  for (int j = 0; j < nv; ++j) {
    LineDerivatives(&values(0, j), nr, 1, grid.dr(), options.spatial_order,
                    &work, &pr_m(0, j), &pr_p(0, j));
  }
  for (int i = 0; i < nr; ++i) {
    LineDerivatives(&values(i, 0), nv, nr, grid.dv(), options.spatial_order,
                    &work, &pv_m(i, 0), &pv_p(i, 0));
  }

  rate->resize(nr, nv);
  // Separable pieces of H: the r part is convex in p_r, the v part is
  // concave in p_v (net braking slopes a_dn for p_v > 0, a_up below).
  auto h_v = [&](double p) { return p > 0.0 ? -a_dn * p : a_up * p; };
  for (int j = 0; j < nv; ++j) {
    const double v = grid.v(j);
    auto h_r = [&](double p) { return p * v + std::abs(p) * drift; };
    const double alpha_r = std::abs(v) + drift;
    for (int i = 0; i < nr; ++i) {
      if (options.scheme == NumericalHamiltonian::kLaxFriedrichs) {
        const double p_r = 0.5 * (pr_m(i, j) + pr_p(i, j));
        const double p_v = 0.5 * (pv_m(i, j) + pv_p(i, j));
        (*rate)(i, j) = Hamiltonian(params, v, p_r, p_v) +
                        0.5 * alpha_r * (pr_p(i, j) - pr_m(i, j)) +
                        0.5 * alpha_v * (pv_p(i, j) - pv_m(i, j));
      } else {
        // Godunov flux of V_tau + G = 0 with G = -H, applied per axis.
        auto g_r = [&](double p) { return -h_r(p); };
        auto g_v = [&](double p) { return -h_v(p); };
        (*rate)(i, j) = -(GodunovExtremum(g_r, pr_m(i, j), pr_p(i, j)) +
                          GodunovExtremum(g_v, pv_m(i, j), pv_p(i, j)));
      }
    }
  }
  return options.cfl / (max_speed / grid.dr() + alpha_v / grid.dv());
}

namespace {

// Second-order TVD Runge-Kutta step of V_tau = rate(V). Returns dt.
double HeunStep(const Grid2& grid, const Subsystem2Params& params,
                const SolverOptions& options, Eigen::MatrixXd* values) {
  Eigen::MatrixXd rate;
  const double dt = NumericalRate(grid, params, *values, options, &rate);
  Eigen::MatrixXd stage = *values + dt * rate;
  NumericalRate(grid, params, stage, options, &rate);
  *values = 0.5 * (*values + stage + dt * rate);
  return dt;
}

}  // namespace

namespace {

bool TouchesBoundary(const ValueFunction2D& vf) {
  const int nr = vf.grid.nr;
  const int nv = vf.grid.nv;
  for (int i = 0; i < nr; ++i) {
    if (vf.InSet(i, 0) || vf.InSet(i, nv - 1)) return true;
  }
  for (int j = 0; j < nv; ++j) {
    if (vf.InSet(0, j) || vf.InSet(nr - 1, j)) return true;
  }
  return false;
}

// Grows a tube V <- max(G, min(V, V + dt * H)) from `initial` until every
// cell in `must_cover` is inside. Returns false if the horizon cap is hit.
bool GrowTube(const Grid2& grid, const Subsystem2Params& params,
              const Eigen::MatrixXd& constraint,
              const std::vector<Eigen::Index>& must_cover,
              const SolverOptions& options, Eigen::MatrixXd* values,
              double* horizon) {
  auto covered = [&] {
    for (Eigen::Index k : must_cover) {
      if (values->data()[k] > 0.0) return false;
    }
    return true;
  };
  *horizon = 0.0;
  while (!covered()) {
    if (*horizon >= options.horizon_cap) return false;
    Eigen::MatrixXd next = *values;
    *horizon += HeunStep(grid, params, options, &next);
    *values = values->cwiseMin(next).cwiseMax(constraint);
  }
  return true;
}

}  // namespace

ValueFunction2D SolveInvariantSet(const Subsystem2Params& params,
                                  const Grid2& grid,
                                  const SolverOptions& options) {
  ValueFunction2D vf;
  vf.grid = grid;
  vf.params = params;
  vf.kind = ValueKind::kInvariant;

  Eigen::MatrixXd cost(grid.nr, grid.nv);
  for (int j = 0; j < grid.nv; ++j) {
    for (int i = 0; i < grid.nr; ++i) cost(i, j) = std::abs(grid.r(i));
  }
  Eigen::MatrixXd values = cost;
  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd next = values;
    const double dt = HeunStep(grid, params, options, &next);
    next = next.cwiseMax(cost);
    residual = (next - values).cwiseAbs().maxCoeff() / dt;
    values.swap(next);
    vf.horizon += dt;
    if (!std::isfinite(residual)) break;
    if (residual < options.tol) {
      vf.converged = true;
      break;
    }
  }
  if (!vf.converged) {
    throw SolverError("invariant-set value iteration did not converge after " +
                          std::to_string(iter) +
                          " iterations (residual " + std::to_string(residual) +
                          ")",
                      residual);
  }
  vf.level = values.minCoeff() + options.level_margin_cells * grid.dr();
  vf.values = values.array() - vf.level;
  if (TouchesBoundary(vf)) {
    throw SolverError(
        "invariant set touches the grid boundary; enlarge the domain",
        residual);
  }
  vf.ComputeGradients();
  return vf;
}

double RaiseLevelToContain(ValueFunction2D* large,
                           const ValueFunction2D& small) {
  if (!(large->grid == small.grid)) {
    throw std::invalid_argument("nesting needs a shared grid");
  }
  const Grid2& g = small.grid;
  double worst = -std::numeric_limits<double>::infinity();
  // Any cell with a corner inside `small` may carry interpolated points of
  // the small set, so all four of its corners must be inside `large`.
  for (int j = 0; j + 1 < g.nv; ++j) {
    for (int i = 0; i + 1 < g.nr; ++i) {
      if (small.values(i, j) > 0.0 && small.values(i + 1, j) > 0.0 &&
          small.values(i, j + 1) > 0.0 && small.values(i + 1, j + 1) > 0.0) {
        continue;
      }
      worst = std::max({worst, large->values(i, j), large->values(i + 1, j),
                        large->values(i, j + 1), large->values(i + 1, j + 1)});
    }
  }
  if (!(worst > 0.0)) return 0.0;
  large->values.array() -= worst;
  large->level += worst;
  large->ComputeGradients();
  if (TouchesBoundary(*large)) {
    throw SolverError("nested invariant set touches the grid boundary", 0.0);
  }
  return worst;
}

ValueFunction2D SolveSsb(const ValueFunction2D& small,
                         const ValueFunction2D& large,
                         const SolverOptions& options) {
  if (!(small.grid == large.grid)) {
    throw std::invalid_argument("switching tube needs a shared grid");
  }
  const Grid2& grid = small.grid;
  std::vector<Eigen::Index> must_cover;
  for (Eigen::Index k = 0; k < large.values.size(); ++k) {
    if (large.values.data()[k] <= 0.0) {
      if (small.values.data()[k] > 0.0) must_cover.push_back(k);
    }
  }

  ValueFunction2D tube;
  tube.grid = grid;
  tube.params = small.params;
  tube.kind = ValueKind::kBrt;

  auto attempt = [&](double position_limit) {
    Eigen::MatrixXd constraint(grid.nr, grid.nv);
    for (int j = 0; j < grid.nv; ++j) {
      for (int i = 0; i < grid.nr; ++i) {
        constraint(i, j) = std::abs(grid.r(i)) - position_limit;
      }
    }
    tube.values = small.values.cwiseMax(constraint);
    tube.level = position_limit;
    return GrowTube(grid, small.params, constraint, must_cover, options,
                    &tube.values, &tube.horizon);
  };

  bool ok = false;
  if (options.constrain_switching_tube) ok = attempt(large.level);
  if (!ok) ok = attempt(std::numeric_limits<double>::infinity());
  if (!ok) {
    throw SolverError(
        "switching tube did not contain the larger tracking set within " +
            std::to_string(options.horizon_cap) + " s",
        0.0);
  }
  tube.converged = true;
  if (TouchesBoundary(tube)) {
    throw SolverError("switching tube touches the grid boundary", 0.0);
  }
  tube.ComputeGradients();
  return tube;
}

double ExtractBound(const ValueFunction2D& vf) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < vf.grid.nv; ++j) {
    for (int i = 0; i < vf.grid.nr; ++i) {
      if (!vf.InSet(i, j)) continue;
      lo = std::min(lo, vf.grid.r(i));
      hi = std::max(hi, vf.grid.r(i));
    }
  }
  if (hi < lo) throw std::runtime_error("empty sublevel set");
  return std::max(std::abs(lo), std::abs(hi)) + vf.grid.dr();
}

ValueSample ValueAndGradient(const ValueFunction2D& vf,
                             const RelativeState2& rel) {
  const Grid2& g = vf.grid;
  if (!g.Contains(rel) || !std::isfinite(rel.r) || !std::isfinite(rel.v)) {
    throw OutOfDomainError("relative state outside value-function grid");
  }
  const double fr = (rel.r - g.r_min) / g.dr();
  const double fv = (rel.v - g.v_min) / g.dv();
  const int i = std::min(static_cast<int>(fr), g.nr - 2);
  const int j = std::min(static_cast<int>(fv), g.nv - 2);
  const double a = fr - i;
  const double b = fv - j;
  auto lerp = [&](const Eigen::MatrixXd& m) {
    return (1 - a) * (1 - b) * m(i, j) + a * (1 - b) * m(i + 1, j) +
           (1 - a) * b * m(i, j + 1) + a * b * m(i + 1, j + 1);
  };
  ValueSample s;
  s.value = lerp(vf.values);
  if (vf.grad_r.size() == vf.values.size()) {
    s.d_r = lerp(vf.grad_r);
    s.d_v = lerp(vf.grad_v);
  }
  return s;
}

std::vector<Eigen::Vector2d> ZeroLevelContour(const ValueFunction2D& vf) {
  const Grid2& g = vf.grid;
  std::vector<Eigen::Vector2d> pts;
  auto crossing = [](double a, double b) { return (a <= 0.0) != (b <= 0.0); };
  for (int j = 0; j < g.nv; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      const double c = vf.values(i, j);
      if (i + 1 < g.nr && crossing(c, vf.values(i + 1, j))) {
        const double t = c / (c - vf.values(i + 1, j));
        pts.emplace_back(g.r(i) + t * g.dr(), g.v(j));
      }
      if (j + 1 < g.nv && crossing(c, vf.values(i, j + 1))) {
        const double t = c / (c - vf.values(i, j + 1));
        pts.emplace_back(g.r(i), g.v(j) + t * g.dv());
      }
    }
  }
  return pts;
}

}  // namespace metaplan
