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

#include "amun/theory.hpp"

#include <cmath>
#include <random>

#include "amun/base64.hpp"
#include "amun/unlearn.hpp"

namespace amun {

double LipschitzInput(const ModelState& state) {
  Require(state.spec.kind == ModelKind::kLogistic,
          "input Lipschitz constant is only computed for logistic models");
  const Matrix w = state.Weights(0);
  if (w.isZero(0.0)) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(w);
  return svd.singularValues()(0);
}

double LipschitzProbabilities(const ModelState& state) {
  return 0.5 * LipschitzInput(state);
}

double SmoothnessBeta(const LabeledDataset& data, bool with_bias) {
  Require(data.size() > 0, "smoothness needs a non-empty dataset");
  const Eigen::Index d = data.features.cols();
  Matrix x(data.features.rows(), with_bias ? d + 1 : d);
  x.leftCols(d) = data.features;
  if (with_bias) x.col(d).setOnes();
  const Matrix gram = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().maxCoeff();
}

ModelState OneStepUnlearn(const ModelState& theta_o, const LabeledDataset& dprime,
                          double beta) {
  Require(beta > 0.0, "beta must be > 0");
  ModelState out = theta_o;
  out.params -= LossAndGrads(theta_o, dprime).grad_params / beta;
  return out;
}

ModelState TrainToResidual(const ModelSpec& spec, const LabeledDataset& data,
                           std::uint64_t seed, const ResidualTraining& opts,
                           double* residual) {
  ModelState state = InitParams(spec, seed);
  double step = 1.0 / SmoothnessBeta(data, true);
  LossGrads lg = LossAndGrads(state, data);
  double worst = SampleLosses(state, data.features, data.labels).maxCoeff();
  for (int it = 0; it < opts.max_iterations && worst > opts.tolerance; ++it) {
    const double g2 = lg.grad_params.squaredNorm();
    if (g2 == 0.0) break;
    step *= 2.0;
    ModelState trial = state;
    for (;;) {
      trial.params = state.params - step * lg.grad_params;
      const double loss = Loss(trial, data);
      if (loss <= lg.loss - 0.5 * step * g2) break;
      step *= 0.5;
    }
    state = std::move(trial);
    lg = LossAndGrads(state, data);
    worst = SampleLosses(state, data.features, data.labels).maxCoeff();
  }
  if (residual != nullptr) *residual = worst;
  return state;
}

ConvexInstance MakeConvexInstance(std::uint64_t seed, const InstanceOptions& opts) {
  Require(opts.n >= 4 && opts.n % 2 == 0, "instance size must be even and >= 4");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(opts.d);
  for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = normal(rng);
  u.normalize();
  const Vector mid = Vector::Constant(opts.d, 0.5);
  const Vector centers[2] = {mid + 0.5 * opts.separation * u, mid - 0.5 * opts.separation * u};

  ConvexInstance inst;
  inst.seed = seed;
  inst.data.num_classes = 2;
  inst.data.features.resize(static_cast<Eigen::Index>(opts.n), opts.d);
  for (std::size_t i = 0; i < opts.n; ++i) {
    const int y = static_cast<int>(i % 2);
    for (Eigen::Index k = 0; k < opts.d; ++k) {
      inst.data.features(static_cast<Eigen::Index>(i), k) =
          centers[y][k] + opts.spread * normal(rng);
    }
    inst.data.labels.push_back(y);
    inst.data.ids.push_back(static_cast<SampleId>(i));
  }
  const std::size_t forget =
      std::uniform_int_distribution<std::size_t>(0, opts.n - 1)(rng);
  inst.forget_id = inst.data.ids[forget];

  const ModelSpec spec = ModelSpec::Logistic(opts.d, 2);
  const std::uint64_t init_seed = rng();
  inst.theta_o = TrainToResidual(spec, inst.data, init_seed, opts.training, &inst.residual_o);
  IndexSet keep;
  for (std::size_t i = 0; i < opts.n; ++i) {
    if (i != forget) keep.push_back(i);
  }
  inst.theta_u = TrainToResidual(spec, inst.data.Subset(keep), init_seed, opts.training,
                                 &inst.residual_u);

  IndexSet all(opts.n);
  for (std::size_t i = 0; i < opts.n; ++i) all[i] = i;
  AttackConfig attack;
  attack.eps_init = DefaultEpsInit(inst.data, all);
  const AdvSet adv = BuildAdversarialSet(inst.theta_o, attack, inst.data, {forget});
  inst.adv = adv.records.front();
  inst.delta = inst.adv.delta;
  inst.lipschitz = LipschitzInput(inst.theta_o);

  AdvSet single;
  single.records.push_back(inst.adv);
  inst.beta = SmoothnessBeta(Concat(inst.data, AdvSetAsDataset(single, 2)), true);
  return inst;
}

double BoundReport::RecomputeRhs() const {
  const double c = component_losses[0] + component_losses[1] - component_losses[2] -
                   component_losses[3];
  return distance_ou + (2.0 / beta) * (lipschitz * delta - c);
}

BoundReport TheoremBoundCheck(const ConvexInstance& inst) {
  const auto row = inst.data.IndexOf(inst.forget_id);
  Require(row.has_value(), "forget id not in the instance dataset");
  const Vector x = inst.data.features.row(static_cast<Eigen::Index>(*row)).transpose();
  const int y = inst.data.labels[*row];
  const Vector& xp = inst.adv.x_adv;
  const int yp = inst.adv.y_adv;

  AdvSet single;
  single.records.push_back(inst.adv);
  const LabeledDataset dprime =
      Concat(inst.data, AdvSetAsDataset(single, inst.data.num_classes));
  const ModelState theta_p = OneStepUnlearn(inst.theta_o, dprime, inst.beta);

  auto loss = [](const ModelState& s, const Vector& point, int label) {
    const int labels[1] = {label};
    return SampleLosses(s, point.transpose(), labels)[0];
  };

  BoundReport r;
  r.component_losses = {loss(inst.theta_o, xp, y), loss(theta_p, xp, yp),
                        loss(inst.theta_u, x, y), loss(inst.theta_u, xp, yp)};
  r.c_term = r.component_losses[0] + r.component_losses[1] - r.component_losses[2] -
             r.component_losses[3];
  r.distance_ou = (inst.theta_o.params - inst.theta_u.params).squaredNorm();
  r.lhs = (theta_p.params - inst.theta_u.params).squaredNorm();
  r.lipschitz = inst.lipschitz;
  r.lipschitz_probabilities = LipschitzProbabilities(inst.theta_o);
  r.beta = inst.beta;
  r.delta = inst.delta;
  r.rhs = r.distance_ou + (2.0 / r.beta) * (r.lipschitz * r.delta - r.c_term);
  r.holds = r.lhs <= r.rhs + 1e-9;
  r.residual_o = inst.residual_o;
  r.residual_u = inst.residual_u;
  r.risk_gap = Loss(inst.theta_u, dprime) - Loss(theta_p, dprime);
  r.risk_gap_bound = 0.5 * r.beta * (r.lhs - r.distance_ou);
  r.intermediate_holds = r.risk_gap >= r.risk_gap_bound - 1e-9;
  return r;
}

std::string BoundCsvHeader() {
  return "seed,lhs,rhs,L,beta,delta,C,holds,residual_o,residual_u";
}

std::string BoundCsvRow(std::uint64_t seed, const BoundReport& r) {
  return std::to_string(seed) + ',' + FormatDouble(r.lhs) + ',' + FormatDouble(r.rhs) + ',' +
         FormatDouble(r.lipschitz) + ',' + FormatDouble(r.beta) + ',' +
         FormatDouble(r.delta) + ',' + FormatDouble(r.c_term) + ',' +
         (r.holds ? "true" : "false") + ',' + FormatDouble(r.residual_o) + ',' +
         FormatDouble(r.residual_u);
}

}  // namespace amun
