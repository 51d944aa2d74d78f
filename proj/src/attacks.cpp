// Copyright 2026 The AMUN Toolkit Authors.
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

#include "amun/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace amun {

namespace {

constexpr double kZeroGradientOffset = 1e-6;

std::uint64_t MixSeed(std::uint64_t seed, const Vector& x, double eps) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
  mix(&eps, sizeof(eps));
  return h;
}

// Input gradient at `point`; on an exactly zero gradient nudges the point by
// a fixed deterministic offset (kept inside the ball) and retries once.
Vector GradientOrNudge(const ModelState& state, Vector* point, const Vector& x,
                       int y, double eps, const AttackConfig& cfg,
                       AttackDiagnostics* diag, bool* stalled) {
  Vector g = InputGradient(state, *point, y);
  *stalled = false;
  if (g.squaredNorm() > 0.0) return g;
  const Vector nudge = Vector::Constant(point->size(), kZeroGradientOffset /
                                                          std::sqrt(static_cast<double>(point->size())));
  *point = ClampToBox(ProjectL2Ball(*point + nudge, x, eps), cfg.clamp_box);
  if (diag) diag->offset_applied = true;
  g = InputGradient(state, *point, y);
  if (g.squaredNorm() == 0.0) {
    *stalled = true;
    if (diag) diag->stalled = true;
  }
  return g;
}

}  // namespace

Box Box::Uniform(std::size_t dim, double lo, double hi) {
  Require(lo < hi, "box lower bound must be below upper bound");
  return {Vector::Constant(static_cast<Eigen::Index>(dim), lo),
          Vector::Constant(static_cast<Eigen::Index>(dim), hi)};
}

void AttackConfig::Validate() const {
  Require(steps >= 1, "attack steps must be >= 1");
  Require(step_fraction > 0.0 && step_fraction <= 1.0,
          "step_fraction must be in (0, 1]");
  Require(eps_init > 0.0, "eps_init must be > 0");
  Require(max_doublings >= 0, "max_doublings must be >= 0");
  Require(restarts >= 1, "restarts must be >= 1");
  Require(random_start_fraction >= 0.0 && random_start_fraction < 1.0,
          "random_start_fraction must be in [0, 1)");
  if (clamp_box) {
    Require(clamp_box->lo.size() == clamp_box->hi.size(), "clamp box size mismatch");
    Require((clamp_box->lo.array() <= clamp_box->hi.array()).all(),
            "clamp box lower bounds exceed upper bounds");
  }
}

Vector ClampToBox(const Vector& point, const std::optional<Box>& box) {
  if (!box) return point;
  Require(box->lo.size() == point.size(), "clamp box dimension mismatch",
          ErrorCode::kDimensionMismatch);
  return point.cwiseMax(box->lo).cwiseMin(box->hi);
}

Vector PgdL2(const ModelState& state, const Vector& x, int y, double eps,
             const AttackConfig& cfg, AttackDiagnostics* diag) {
  Require(eps > 0.0, "attack eps must be > 0");
  Require(x.size() == state.spec.input_dim(), "attack input dimension mismatch",
          ErrorCode::kDimensionMismatch);
  const double step = cfg.step_fraction * eps;
  Vector adv = x;
  for (int s = 0; s < cfg.steps; ++s) {
    bool stalled = false;
    const Vector g = GradientOrNudge(state, &adv, x, y, eps, cfg, diag, &stalled);
    if (stalled) break;
    adv = ClampToBox(ProjectL2Ball(adv + step * g / g.norm(), x, eps), cfg.clamp_box);
    if (diag && diag->record_iterates) diag->iterates.push_back(adv);
  }
  return adv;
}

Vector FfgsmSearch(const ModelState& state, const Vector& x, int y, double eps,
                   const AttackConfig& cfg, AttackDiagnostics* diag) {
  Require(eps > 0.0, "attack eps must be > 0");
  Require(x.size() == state.spec.input_dim(), "attack input dimension mismatch",
          ErrorCode::kDimensionMismatch);
  std::mt19937_64 rng(MixSeed(cfg.seed, x, eps));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double step = cfg.step_fraction * eps;
  const double start_radius = cfg.random_start_fraction * eps;
  Vector candidate = x;
  for (int r = 0; r < cfg.restarts; ++r) {
    Vector start = x;
    if (start_radius > 0.0) {
      Vector u(x.size());
      for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = normal(rng);
      if (u.norm() > 0.0) start += start_radius * u / u.norm();
      start = ClampToBox(ProjectL2Ball(start, x, eps), cfg.clamp_box);
    }
    bool stalled = false;
    const Vector g = GradientOrNudge(state, &start, x, y, eps, cfg, diag, &stalled);
    if (stalled) {
      candidate = start;
      continue;
    }
    Vector direction = GradientSign(g);
    direction /= direction.norm();
    for (int k = 1; k <= cfg.steps; ++k) {
      const Vector raw = start + (k * step) * direction;
      candidate = ClampToBox(ProjectL2Ball(raw, x, eps), cfg.clamp_box);
      if (diag && diag->record_iterates) diag->iterates.push_back(candidate);
      if (Predict(state, candidate) != y) return candidate;
      if ((raw - x).norm() > eps) break;  // further steps project to the same point
    }
  }
  return candidate;
}

Vector RunAttack(const ModelState& state, const Vector& x, int y, double eps,
                 const AttackConfig& cfg, AttackDiagnostics* diag) {
  return cfg.kind == AttackKind::kPgd ? PgdL2(state, x, y, eps, cfg, diag)
                                      : FfgsmSearch(state, x, y, eps, cfg, diag);
}

AdvSet BuildAdversarialSet(const ModelState& state, const AttackConfig& cfg,
                           const DatasetView& data, const IndexSet& forget_idx) {
  Require(!forget_idx.empty(), "build_adversarial_set needs a non-empty forget set");
  cfg.Validate();
  AdvSet out;
  out.source_fingerprint = Fingerprint(state);
  out.records.reserve(forget_idx.size());
  for (std::size_t i : forget_idx) {
    const Vector x = data.Row(i);
    const int y = data.Label(i);
    double eps = cfg.eps_init;
    bool found = false;
    for (int d = 0; d <= cfg.max_doublings; ++d, eps *= 2.0) {
      Vector adv = RunAttack(state, x, y, eps, cfg);
      const int y_adv = Predict(state, adv);
      if (y_adv != y) {
        AdvRecord rec;
        rec.orig_id = data.Id(i);
        rec.delta = (adv - x).norm();
        rec.x_adv = std::move(adv);
        rec.y_adv = y_adv;
        rec.y_true = y;
        rec.eps_used = eps;
        out.records.push_back(std::move(rec));
        found = true;
        break;
      }
    }
    if (!found) out.failures.push_back({data.Id(i), eps / 2.0});
  }
  if (cfg.strict && !out.failures.empty()) {
    Fail(ErrorCode::kAttackFailed,
         std::to_string(out.failures.size()) +
             " forget samples have no adversarial example within " +
             std::to_string(cfg.max_doublings) + " doublings (first id " +
             std::to_string(out.failures.front().orig_id) + ")");
  }
  return out;
}

double Median(std::vector<double> values) {
  Require(!values.empty(), "median of an empty sequence");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double MedianNearestNeighborDistance(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Require(n >= 2, "nearest-neighbor distance needs at least two points");
  // Sweep along the first coordinate; a candidate is only examined while its
  // first-coordinate gap is below the best distance found so far.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return points(a, 0) < points(b, 0);
  });
  std::vector<double> nn(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto p = points.row(order[r]);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t s = r + 1; s < order.size(); ++s) {
      const double gap = points(order[s], 0) - p(0);
      if (gap * gap >= best2) break;
      best2 = std::min(best2, (points.row(order[s]) - p).squaredNorm());
    }
    for (std::size_t s = r; s-- > 0;) {
      const double gap = p(0) - points(order[s], 0);
      if (gap * gap >= best2) break;
      best2 = std::min(best2, (points.row(order[s]) - p).squaredNorm());
    }
    nn[r] = std::sqrt(best2);
  }
  return Median(std::move(nn));
}

double DefaultEpsInit(const LabeledDataset& data, const IndexSet& idx) {
  const double nn = MedianNearestNeighborDistance(data.Subset(idx).features);
  Require(nn > 0.0, "median nearest-neighbor distance is zero; set eps_init explicitly");
  return 0.01 * nn;
}

DistanceReport MakeDistanceReport(const AdvSet& adv, const Matrix& training_points) {
  Require(!adv.records.empty(), "distance report needs a non-empty AdvSet");
  std::vector<double> deltas;
  deltas.reserve(adv.records.size());
  for (const AdvRecord& r : adv.records) deltas.push_back(r.delta);
  DistanceReport report;
  report.min_delta = *std::min_element(deltas.begin(), deltas.end());
  report.max_delta = *std::max_element(deltas.begin(), deltas.end());
  report.median_delta = Median(deltas);
  report.median_nn_distance = MedianNearestNeighborDistance(training_points);
  report.delta_not_local = report.median_delta >= report.median_nn_distance;
  return report;
}

}  // namespace amun
