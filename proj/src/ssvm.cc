// Copyright 2026 The Whyact Authors.
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "whyact/error.h"
#include "whyact/learn.h"
#include "whyact/parallel.h"

namespace whyact {

double JointFeature::Dot(const Model &model) const {
  double s = 0.0;
  for (int c = 0; c < kNumConcepts; ++c) {
    s += whyact::Dot(model.weights[c].row(y.y[c]), features);
  }
  for (int f = 0; f < kNumFactors; ++f) s += model.u[f] * factors[f];
  return s;
}

size_t ThetaDim(const std::array<int, kNumConcepts> &dims, int feature_dim) {
  size_t n = kNumFactors;
  for (int d : dims) n += static_cast<size_t>(d) * feature_dim;
  return n;
}

std::vector<double> JointFeature::Dense(const std::array<int, kNumConcepts> &dims) const {
  const int d = static_cast<int>(features.size());
  std::vector<double> out(ThetaDim(dims, d), 0.0);
  size_t block = 0;
  for (int c = 0; c < kNumConcepts; ++c) {
    const size_t at = block + static_cast<size_t>(y.y[c]) * d;
    std::copy(features.begin(), features.end(), out.begin() + static_cast<std::ptrdiff_t>(at));
    block += static_cast<size_t>(dims[c]) * d;
  }
  std::copy(factors.begin(), factors.end(), out.begin() + static_cast<std::ptrdiff_t>(block));
  return out;
}

JointFeature MakeJointFeature(const GraphSpec &spec, std::span<const double> features,
                              const Configuration &y, const FactorMask &mask) {
  JointFeature psi;
  psi.y = y;
  psi.features = features;
  psi.factors = spec.FactorValues(y);
  for (int f = 0; f < kNumFactors; ++f) {
    if (!mask[f]) psi.factors[f] = 0.0;
  }
  return psi;
}

std::vector<double> FlattenTheta(const Model &model) {
  std::vector<double> out;
  for (const auto &w : model.weights) out.insert(out.end(), w.data.begin(), w.data.end());
  out.insert(out.end(), model.u.begin(), model.u.end());
  return out;
}

double Loss(const Configuration &y, const Configuration &h) { return y == h ? 0.0 : 1.0; }

size_t WorkingSet::size() const {
  size_t n = 0;
  for (const auto &c : constraints) n += c.size();
  return n;
}

namespace {

double SquaredNorm(const Model &model) {
  double s = 0.0;
  for (const auto &w : model.weights) {
    for (double v : w.data) s += v * v;
  }
  for (double v : model.u) s += v * v;
  return s;
}

// theta.(psi(y) - psi(h)).
double DeltaDot(const Model &model, const Configuration &y, std::span<const double> phi,
                const Constraint &c) {
  double s = 0.0;
  for (int k = 0; k < kNumConcepts; ++k) {
    if (y.y[k] == c.h.y[k]) continue;
    s += Dot(model.weights[k].row(y.y[k]), phi) - Dot(model.weights[k].row(c.h.y[k]), phi);
  }
  for (int f = 0; f < kNumFactors; ++f) s += model.u[f] * c.factor_delta[f];
  return s;
}

// theta += scale * (psi(y) - psi(h)).
void AddDelta(Model &model, const Configuration &y, std::span<const double> phi,
              const Constraint &c, double scale) {
  for (int k = 0; k < kNumConcepts; ++k) {
    if (y.y[k] == c.h.y[k]) continue;
    auto up = model.weights[k].row(y.y[k]);
    auto down = model.weights[k].row(c.h.y[k]);
    for (size_t j = 0; j < phi.size(); ++j) {
      up[j] += scale * phi[j];
      down[j] -= scale * phi[j];
    }
  }
  for (int f = 0; f < kNumFactors; ++f) model.u[f] += scale * c.factor_delta[f];
}

// <psi(y) - psi(h1), psi(y) - psi(h2)> without forming either vector.
double DeltaKernel(const Configuration &y, double phi_sq, const Constraint &a,
                   const Constraint &b) {
  double overlap = 0.0;
  for (int k = 0; k < kNumConcepts; ++k) {
    if (a.h.y[k] != y.y[k] && b.h.y[k] != y.y[k]) {
      overlap += a.h.y[k] == b.h.y[k] ? 2.0 : 1.0;
    }
  }
  double s = overlap * phi_sq;
  for (int f = 0; f < kNumFactors; ++f) s += a.factor_delta[f] * b.factor_delta[f];
  return s;
}

struct ExampleCache {
  double phi_sq = 0.0;
  std::array<double, kNumFactors> truth_factors{};
};

// Pairwise (SMO-style) ascent on one example's dual block. The block holds
// the constraint multipliers plus a slack multiplier with zero feature and
// zero loss, so the box sum(alpha) <= C becomes an equality. Returns the
// KKT violation measured before any update.
double OptimizeBlock(Model &model, const Example &ex, const ExampleCache &cache,
                     std::vector<Constraint> &cons, double &slack, double tolerance) {
  const int m = static_cast<int>(cons.size());
  std::vector<double> g(m);
  for (int i = 0; i < m; ++i) {
    g[i] = 1.0 - DeltaDot(model, ex.truth, ex.features, cons[i]);
  }
  constexpr int kSlack = -1;
  constexpr int kNone = -2;
  auto kernel = [&](int i, int j) {
    if (i == kSlack || j == kSlack) return 0.0;
    return DeltaKernel(ex.truth, cache.phi_sq, cons[i], cons[j]);
  };
  double initial = 0.0;
  const int max_iter = m + 1;
  for (int iter = 0; iter < max_iter; ++iter) {
    int up = kSlack;
    double g_up = 0.0;
    for (int i = 0; i < m; ++i) {
      if (g[i] > g_up) {
        g_up = g[i];
        up = i;
      }
    }
    int down = kNone;
    double g_down = std::numeric_limits<double>::infinity();
    if (slack > 0.0) {
      down = kSlack;
      g_down = 0.0;
    }
    for (int i = 0; i < m; ++i) {
      if (cons[i].alpha > 0.0 && g[i] < g_down) {
        g_down = g[i];
        down = i;
      }
    }
    if (down == kNone) break;
    const double violation = g_up - g_down;
    if (iter == 0) initial = std::max(violation, 0.0);
    if (violation <= tolerance || up == down) break;

    const double curvature = kernel(up, up) + kernel(down, down) - 2.0 * kernel(up, down);
    double &down_alpha = down == kSlack ? slack : cons[down].alpha;
    double &up_alpha = up == kSlack ? slack : cons[up].alpha;
    double t = down_alpha;
    if (curvature > 0.0) t = std::min(t, violation / curvature);
    if (t <= 0.0) break;

    up_alpha += t;
    if (t == down_alpha) {
      down_alpha = 0.0;
    } else {
      down_alpha -= t;
    }
    if (up != kSlack) AddDelta(model, ex.truth, ex.features, cons[up], t);
    if (down != kSlack) AddDelta(model, ex.truth, ex.features, cons[down], -t);
    for (int i = 0; i < m; ++i) g[i] -= t * (kernel(i, up) - kernel(i, down));
  }
  return initial;
}

struct QpSummary {
  double working_set_objective = 0.0;
  double dual_objective = 0.0;
};

void ZeroTheta(Model &model) {
  for (auto &w : model.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  model.u.fill(0.0);
}

// theta = sum alpha * (psi(y) - psi(h)), recomputed to shed rounding drift.
void RecomputeTheta(Model &model, const std::vector<Example> &examples, const WorkingSet &ws) {
  ZeroTheta(model);
  for (size_t i = 0; i < examples.size(); ++i) {
    for (const auto &c : ws.constraints[i]) {
      if (c.alpha > 0.0) AddDelta(model, examples[i].truth, examples[i].features, c, c.alpha);
    }
  }
}

// Conjugate gradient on the current face of the dual: multipliers that are
// zero stay zero and each block keeps its sum. Stops at the face optimum
// or when a multiplier reaches zero.
// Returns true when a multiplier reached zero before the face optimum.
bool FaceStep(Model &model, const std::vector<Example> &examples, WorkingSet &ws, Model &direction,
              double tolerance, int &budget) {
  struct Free {
    size_t block;
    int index;  // -1 for the slack multiplier
  };
  std::vector<Free> vars;
  std::vector<std::pair<size_t, size_t>> blocks;  // [begin, end) into vars
  for (size_t n = 0; n < examples.size(); ++n) {
    const size_t begin = vars.size();
    if (ws.slack_alpha[n] > 0.0) vars.push_back({n, -1});
    for (size_t i = 0; i < ws.constraints[n].size(); ++i) {
      if (ws.constraints[n][i].alpha > 0.0) vars.push_back({n, static_cast<int>(i)});
    }
    if (vars.size() - begin < 2) {
      vars.resize(begin);
    } else {
      blocks.emplace_back(begin, vars.size());
    }
  }
  if (blocks.empty()) return false;
  const size_t nv = vars.size();
  auto alpha = [&](const Free &v) -> double & {
    return v.index < 0 ? ws.slack_alpha[v.block] : ws.constraints[v.block][v.index].alpha;
  };
  auto project = [&](std::vector<double> &x) {
    for (const auto &[b, e] : blocks) {
      double mean = 0.0;
      for (size_t k = b; k < e; ++k) mean += x[k];
      mean /= static_cast<double>(e - b);
      for (size_t k = b; k < e; ++k) x[k] -= mean;
    }
  };
  // Hessian-vector product: direction = sum p_k a_k, hp_k = a_k . direction.
  auto hessian = [&](const std::vector<double> &p, std::vector<double> &hp) {
    ZeroTheta(direction);
    for (size_t k = 0; k < nv; ++k) {
      const Free &v = vars[k];
      if (v.index < 0 || p[k] == 0.0) continue;
      const Example &ex = examples[v.block];
      AddDelta(direction, ex.truth, ex.features, ws.constraints[v.block][v.index], p[k]);
    }
    for (size_t k = 0; k < nv; ++k) {
      const Free &v = vars[k];
      if (v.index < 0) {
        hp[k] = 0.0;
        continue;
      }
      const Example &ex = examples[v.block];
      hp[k] = DeltaDot(direction, ex.truth, ex.features, ws.constraints[v.block][v.index]);
    }
  };

  std::vector<double> r(nv), p(nv, 0.0), hp(nv);
  for (size_t k = 0; k < nv; ++k) {
    const Free &v = vars[k];
    const Example &ex = examples[v.block];
    r[k] = v.index < 0
               ? 0.0
               : 1.0 - DeltaDot(model, ex.truth, ex.features, ws.constraints[v.block][v.index]);
  }
  project(r);
  p = r;
  double rr = 0.0;
  for (double x : r) rr += x * x;
  for (; budget > 0; --budget) {
    double r_max = 0.0;
    for (double x : r) r_max = std::max(r_max, std::abs(x));
    if (r_max <= 0.25 * tolerance) return false;
    hessian(p, hp);
    double slope = 0.0;
    double curvature = 0.0;
    for (size_t k = 0; k < nv; ++k) {
      slope += r[k] * p[k];
      curvature += p[k] * hp[k];
    }
    if (slope <= 0.0) return false;
    double step = curvature > 0.0 ? slope / curvature : std::numeric_limits<double>::infinity();
    size_t blocking = nv;
    for (size_t k = 0; k < nv; ++k) {
      if (p[k] < 0.0) {
        const double limit = alpha(vars[k]) / -p[k];
        if (limit < step) {
          step = limit;
          blocking = k;
        }
      }
    }
    if (!std::isfinite(step)) return false;
    for (size_t k = 0; k < nv; ++k) {
      double &a = alpha(vars[k]);
      a = k == blocking ? 0.0 : std::max(0.0, a + step * p[k]);
    }
    for (int c = 0; c < kNumConcepts; ++c) {
      auto &w = model.weights[c].data;
      const auto &d = direction.weights[c].data;
      for (size_t j = 0; j < w.size(); ++j) w[j] += step * d[j];
    }
    for (int f = 0; f < kNumFactors; ++f) model.u[f] += step * direction.u[f];
    if (blocking != nv) {
      --budget;
      return true;
    }
    project(hp);
    for (size_t k = 0; k < nv; ++k) r[k] -= step * hp[k];
    double rr_next = 0.0;
    for (double x : r) rr_next += x * x;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (size_t k = 0; k < nv; ++k) p[k] = r[k] + beta * p[k];
  }
  return false;
}

void FaceConjugateGradient(Model &model, const std::vector<Example> &examples, WorkingSet &ws,
                           Model &direction, double tolerance, int max_iterations) {
  int budget = max_iterations;
  while (budget > 0 && FaceStep(model, examples, ws, direction, tolerance, budget)) {
  }
}

QpSummary SolveWorkingSet(Model &model, const std::vector<Example> &examples,
                          const std::vector<ExampleCache> &cache, WorkingSet &ws,
                          const TrainOptions &options) {
  const size_t n = examples.size();
  Model direction = model;
  size_t theta_dim = 0;
  for (const auto &w : model.weights) theta_dim += w.data.size();
  const int cg_iterations = static_cast<int>(20 * (theta_dim + kNumFactors) + 100);
  bool solved = false;
  double last_violation = 0.0;
  for (int sweep = 0; sweep < options.qp_max_sweeps; ++sweep) {
    RecomputeTheta(model, examples, ws);
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (ws.constraints[i].empty()) continue;
      worst = std::max(worst, OptimizeBlock(model, examples[i], cache[i], ws.constraints[i],
                                            ws.slack_alpha[i], options.qp_tolerance));
    }
    last_violation = worst;
    if (worst <= options.qp_tolerance) {
      solved = true;
      break;
    }
    FaceConjugateGradient(model, examples, ws, direction, options.qp_tolerance, cg_iterations);
  }
  if (!solved) {
    throw Error(ErrorCode::kQpFailure, "working-set QP did not reach KKT tolerance " +
                                           std::to_string(options.qp_tolerance) + " in " +
                                           std::to_string(options.qp_max_sweeps) +
                                           " sweeps (violation " + std::to_string(last_violation) +
                                           ")");
  }
  QpSummary out;
  const double half_norm = 0.5 * SquaredNorm(model);
  double alpha_sum = 0.0;
  double slack_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double xi = 0.0;
    for (const auto &c : ws.constraints[i]) {
      alpha_sum += c.alpha;
      xi = std::max(xi, 1.0 - DeltaDot(model, examples[i].truth, examples[i].features, c));
    }
    slack_sum += xi;
  }
  out.working_set_objective = half_norm + ws.C * slack_sum;
  out.dual_objective = alpha_sum - half_norm;
  return out;
}

struct Inference {
  double truth_score = 0.0;
  std::vector<ScoredConfig> best;  // K-best excluding the truth
  bool truth_is_argmax = true;
};

Inference InferExcludingTruth(const ScoreTable &table, const Example &ex, int k) {
  Inference inf;
  inf.truth_score = table.score(*table.IndexOf(ex.truth));
  inf.best = table.KBest(k, ex.truth);
  const auto &top = inf.best.front();
  inf.truth_is_argmax =
      inf.truth_score > top.score || (inf.truth_score == top.score && ex.truth < top.config);
  return inf;
}

void ValidateExamples(const GraphSpec &spec, const std::vector<Example> &examples) {
  if (examples.empty()) throw Error(ErrorCode::kDataEmpty, "no training examples");
  for (const auto &ex : examples) {
    if (static_cast<int>(ex.features.size()) != spec.feature_dim()) {
      throw Error(ErrorCode::kInvalidArgument, "example '" + ex.image_id + "' has feature length " +
                                                   std::to_string(ex.features.size()) +
                                                   ", graph expects " +
                                                   std::to_string(spec.feature_dim()));
    }
    if (!spec.Contains(ex.truth)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "example '" + ex.image_id + "' has an out-of-range label");
    }
  }
}

}  // namespace

TrainResult TrainSsvm(const GraphSpec &spec, const std::vector<Example> &examples,
                      const TrainOptions &options) {
  ValidateExamples(spec, examples);
  if (!(options.C > 0.0) || !(options.eps > 0.0) || options.K < 1 || options.max_passes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need C > 0, eps > 0, K >= 1, max_passes >= 1");
  }
  const size_t n = examples.size();
  TrainResult result;
  Model &model = result.model;
  model = Model::Zero(spec.dims(), spec.feature_dim());
  model.factor_mask = options.factor_mask;
  model.C = options.C;
  for (int f = 0; f < kNumFactors; ++f) {
    model.tensor_normalization.push_back(spec.factor(f).normalization);
  }
  WorkingSet &ws = result.working_set;
  ws.C = options.C;
  ws.constraints.assign(n, {});
  ws.slack_alpha.assign(n, options.C);

  std::vector<ExampleCache> cache(n);
  for (size_t i = 0; i < n; ++i) {
    cache[i].phi_sq = Dot(examples[i].features, examples[i].features);
    cache[i].truth_factors =
        MakeJointFeature(spec, examples[i].features, examples[i].truth, options.factor_mask)
            .factors;
  }
  if (spec.num_configs() < 2) {
    result.converged = true;
    return result;
  }
  const int k =
      static_cast<int>(std::min<size_t>(static_cast<size_t>(options.K), spec.num_configs() - 1));

  for (int pass = 1;; ++pass) {
    std::vector<std::vector<Configuration>> found(n);
    std::vector<double> exact_slack(n, 0.0);
    std::vector<char> mistaken(n, 0);
    ParallelFor(n, options.threads, [&](size_t i) {
      const ScoreTable table(spec, model, examples[i].features);
      const Inference inf = InferExcludingTruth(table, examples[i], k);
      exact_slack[i] = std::max(0.0, 1.0 - (inf.truth_score - inf.best.front().score));
      mistaken[i] = inf.truth_is_argmax ? 0 : 1;
      double xi = 0.0;
      for (const auto &c : ws.constraints[i]) {
        xi = std::max(xi, 1.0 - (inf.truth_score - table.score(*table.IndexOf(c.h))));
      }
      for (const auto &cand : inf.best) {
        const double margin = inf.truth_score - cand.score;
        if (margin >= 1.0 - xi - options.eps) continue;
        const bool known = std::any_of(ws.constraints[i].begin(), ws.constraints[i].end(),
                                       [&](const Constraint &c) { return c.h == cand.config; });
        if (!known) found[i].push_back(cand.config);
      }
    });

    PassLog log;
    log.pass = pass;
    double slack_sum = 0.0;
    int errors = 0;
    for (size_t i = 0; i < n; ++i) {
      slack_sum += exact_slack[i];
      errors += mistaken[i];
    }
    log.primal_objective = 0.5 * SquaredNorm(model) + options.C * slack_sum;
    log.training_loss = static_cast<double>(errors) / static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      for (const auto &h : found[i]) {
        Constraint c;
        c.h = h;
        const auto lh = MakeJointFeature(spec, examples[i].features, h, options.factor_mask);
        for (int f = 0; f < kNumFactors; ++f) {
          c.factor_delta[f] = cache[i].truth_factors[f] - lh.factors[f];
        }
        ws.constraints[i].push_back(c);
        ++log.constraints_added;
      }
    }
    log.working_set_size = static_cast<int>(ws.size());
    if (log.constraints_added == 0) {
      result.converged = true;
      model.training_log.push_back(log);
      break;
    }
    const QpSummary qp = SolveWorkingSet(model, examples, cache, ws, options);
    log.working_set_objective = qp.working_set_objective;
    log.dual_objective = qp.dual_objective;
    model.training_log.push_back(log);
    if (pass >= options.max_passes) break;
  }
  return result;
}

double PrimalObjective(const GraphSpec &spec, const Model &model,
                       const std::vector<Example> &examples, double C) {
  ValidateExamples(spec, examples);
  double slack_sum = 0.0;
  if (spec.num_configs() >= 2) {
    for (const auto &ex : examples) {
      ScoreTable table(spec, model, ex.features);
      const double sy = table.score(*table.IndexOf(ex.truth));
      slack_sum += std::max(0.0, 1.0 - (sy - table.KBest(1, ex.truth).front().score));
    }
  }
  return 0.5 * SquaredNorm(model) + C * slack_sum;
}

Model ReconstructFromDuals(const GraphSpec &spec, const std::vector<Example> &examples,
                           const WorkingSet &ws) {
  Model model = Model::Zero(spec.dims(), spec.feature_dim());
  for (size_t i = 0; i < examples.size(); ++i) {
    for (const auto &c : ws.constraints[i]) {
      AddDelta(model, examples[i].truth, examples[i].features, c, c.alpha);
    }
  }
  return model;
}

double TrainingLoss(const GraphSpec &spec, const Model &model,
                    const std::vector<Example> &examples) {
  if (examples.empty()) return 0.0;
  int errors = 0;
  for (const auto &ex : examples) {
    const auto top = KBest(spec, model, ex.features, 1);
    errors += top.front().config == ex.truth ? 0 : 1;
  }
  return static_cast<double>(errors) / static_cast<double>(examples.size());
}

}  // namespace whyact
