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

#ifndef AMUN_ATTACKS_HPP_
#define AMUN_ATTACKS_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "amun/dataset.hpp"
#include "amun/model.hpp"

namespace amun {

enum class AttackKind { kPgd, kFfgsm };

struct Box {
  Vector lo;
  Vector hi;

  static Box Uniform(std::size_t dim, double lo, double hi);
};

struct AttackConfig {
  AttackKind kind = AttackKind::kPgd;
  int steps = 50;
  double step_fraction = 0.1;  // step size = step_fraction * eps
  double eps_init = 0.01;
  int max_doublings = 20;
  std::optional<Box> clamp_box;
  std::uint64_t seed = 0;
  // FFGSM only: number of random restarts per eps and the radius of the
  // random start as a fraction of eps.
  int restarts = 4;
  double random_start_fraction = 0.1;
  // Throw when any forget sample has no adversarial example.
  bool strict = true;

  void Validate() const;
};

struct AdvRecord {
  SampleId orig_id = 0;
  Vector x_adv;
  int y_adv = 0;
  int y_true = 0;
  double delta = 0.0;  // ||x - x_adv||_2
  double eps_used = 0.0;
};

struct AdvFailure {
  SampleId orig_id = 0;
  double last_eps = 0.0;
};

struct AdvSet {
  std::vector<AdvRecord> records;  // forget_idx order
  std::vector<AdvFailure> failures;
  std::uint64_t source_fingerprint = 0;
};

struct AttackDiagnostics {
  bool offset_applied = false;  // zero gradient met, deterministic nudge used
  bool stalled = false;         // gradient stayed zero after the nudge
  std::vector<Vector> iterates;
  bool record_iterates = false;
};

template <typename Derived>
Vector GradientSign(const Eigen::MatrixBase<Derived>& g) {
  return g.cwiseSign();
}

// Euclidean projection of `point` onto the ball of radius eps around `center`.
template <typename A, typename B>
Vector ProjectL2Ball(const Eigen::MatrixBase<A>& point,
                     const Eigen::MatrixBase<B>& center, double eps) {
  Vector offset = point - center;
  const double norm = offset.norm();
  if (norm > eps) offset *= eps / norm;
  return center + offset;
}

Vector ClampToBox(const Vector& point, const std::optional<Box>& box);

// Untargeted L2 PGD: ascends the true-label loss from x along the
// normalized input gradient, step_fraction*eps per step, projecting onto the
// eps-ball (then the clamp box) after every step.
Vector PgdL2(const ModelState& state, const Vector& x, int y, double eps,
             const AttackConfig& cfg, AttackDiagnostics* diag = nullptr);

// Weak attack: a small random start, then a walk along the gradient sign
// computed once per restart. Returns the first misclassified point, else the
// last point of the last restart. Never leaves the eps-ball.
Vector FfgsmSearch(const ModelState& state, const Vector& x, int y, double eps,
                   const AttackConfig& cfg, AttackDiagnostics* diag = nullptr);

Vector RunAttack(const ModelState& state, const Vector& x, int y, double eps,
                 const AttackConfig& cfg, AttackDiagnostics* diag = nullptr);

// Epsilon-doubling search for every forget sample: eps_init, 2*eps_init, ...
// until the model's prediction on the attacked point differs from y.
AdvSet BuildAdversarialSet(const ModelState& state, const AttackConfig& cfg,
                           const DatasetView& data, const IndexSet& forget_idx);

// Median distance from each row to its nearest other row.
double MedianNearestNeighborDistance(const Matrix& points);

// 1% of the median nearest-neighbor distance among the indexed rows.
double DefaultEpsInit(const LabeledDataset& data, const IndexSet& idx);

struct DistanceReport {
  double min_delta = 0.0;
  double median_delta = 0.0;
  double max_delta = 0.0;
  double median_nn_distance = 0.0;
  bool delta_not_local = false;  // median delta >= median NN distance
};

DistanceReport MakeDistanceReport(const AdvSet& adv, const Matrix& training_points);

double Median(std::vector<double> values);

}  // namespace amun

#endif  // AMUN_ATTACKS_HPP_
