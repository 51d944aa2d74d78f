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

#ifndef AMUN_THEORY_HPP_
#define AMUN_THEORY_HPP_

#include <array>
#include <cstdint>
#include <string>

#include "amun/attacks.hpp"
#include "amun/dataset.hpp"
#include "amun/model.hpp"

namespace amun {

// Spectral norm of the weight matrix of a logistic model: a Lipschitz
// constant of the logit map x -> Wx + b.
double LipschitzInput(const ModelState& state);

// Softmax has Jacobian norm <= 1/2, so half the logit constant bounds the
// probability map.
double LipschitzProbabilities(const ModelState& state);

// Smoothness constant of the unnormalized softmax cross-entropy sum of a
// logistic model: 0.5 * lambda_max(sum_i x_i x_i^T), where x_i is augmented
// with a constant 1 when the model has biases.
double SmoothnessBeta(const LabeledDataset& data, bool with_bias = true);

// theta' = theta_o - (1/beta) * grad of the summed loss over `dprime`.
ModelState OneStepUnlearn(const ModelState& theta_o, const LabeledDataset& dprime,
                          double beta);

struct ResidualTraining {
  int max_iterations = 200000;
  double tolerance = 1e-3;  // largest per-sample cross-entropy allowed
};

// Full-batch gradient descent with backtracking on the summed loss until
// every sample's loss is <= tolerance. `residual` receives the final largest
// per-sample loss.
ModelState TrainToResidual(const ModelSpec& spec, const LabeledDataset& data,
                           std::uint64_t seed, const ResidualTraining& opts,
                           double* residual);

struct ConvexInstance {
  LabeledDataset data;  // D
  SampleId forget_id = 0;
  AdvRecord adv;  // (x', y')
  ModelState theta_o;
  ModelState theta_u;
  double beta = 0.0;  // smoothness of the loss over D u {(x', y')}
  double lipschitz = 0.0;
  double delta = 0.0;
  double residual_o = 0.0;
  double residual_u = 0.0;
  std::uint64_t seed = 0;
};

struct InstanceOptions {
  std::size_t n = 40;
  int d = 2;
  double separation = 0.5;  // distance between the two class centers
  double spread = 0.06;
  ResidualTraining training;
};

// Seeded separable two-class instance with theta_o trained on D, theta_u on
// D minus the forget sample and (x', y') from the PGD doubling search.
ConvexInstance MakeConvexInstance(std::uint64_t seed, const InstanceOptions& opts = {});

struct BoundReport {
  double lhs = 0.0;  // ||theta' - theta_u||^2
  double rhs = 0.0;  // ||theta_o - theta_u||^2 + (2/beta)(L delta - C)
  double c_term = 0.0;
  // l(theta_o; x', y), l(theta'; x', y'), l(theta_u; x, y), l(theta_u; x', y')
  std::array<double, 4> component_losses{};
  double distance_ou = 0.0;  // ||theta_o - theta_u||^2
  double lipschitz = 0.0;
  double lipschitz_probabilities = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  bool holds = false;
  double residual_o = 0.0;
  double residual_u = 0.0;
  // Intermediate step: R(theta_u) - R(theta') >= (beta/2)(lhs - distance_ou).
  double risk_gap = 0.0;
  double risk_gap_bound = 0.0;
  bool intermediate_holds = false;

  // rhs rebuilt from the stored components.
  double RecomputeRhs() const;
};

BoundReport TheoremBoundCheck(const ConvexInstance& instance);

// seed,lhs,rhs,L,beta,delta,C,holds,residual_o,residual_u
std::string BoundCsvHeader();
std::string BoundCsvRow(std::uint64_t seed, const BoundReport& report);

}  // namespace amun

#endif  // AMUN_THEORY_HPP_
