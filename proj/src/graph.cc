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

#include "whyact/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "whyact/error.h"

namespace whyact {
namespace {

// Factor positions in DefaultFactorList.
enum Factor {
  kM = 0,
  kA = 1,
  kO = 2,
  kS = 3,
  kMA = 4,
  kMO = 5,
  kMS = 6,
  kAO = 7,
  kAS = 8,
  kOS = 9,
  kMAO = 10,
  kAOS = 11,
  kMAS = 12,
};

constexpr int kMot = 0, kAct = 1, kObj = 2, kScn = 3;

// u-scaled factor tables plus per-value vision scores for one image.
struct ScoringTerms {
  std::array<std::vector<double>, kNumConcepts> vision;
  std::array<std::vector<double>, kNumFactors> scaled;
  std::array<int, kNumConcepts> dims{};

  ScoringTerms(const GraphSpec &spec, const Model &model, std::span<const double> features) {
    if (static_cast<int>(features.size()) != spec.feature_dim() ||
        model.feature_dim != spec.feature_dim()) {
      throw Error(ErrorCode::kInvalidArgument, "feature dimension mismatch: features " +
                                                   std::to_string(features.size()) + ", model " +
                                                   std::to_string(model.feature_dim) + ", graph " +
                                                   std::to_string(spec.feature_dim()));
    }
    dims = spec.dims();
    for (int c = 0; c < kNumConcepts; ++c) {
      const Matrix &w = model.weights[c];
      if (w.rows != dims[c] || w.cols != spec.feature_dim()) {
        throw Error(ErrorCode::kInvalidArgument, "model weight shape does not match the graph");
      }
      vision[c].resize(dims[c]);
      for (int v = 0; v < dims[c]; ++v) vision[c][v] = Dot(w.row(v), features);
    }
    for (int f = 0; f < kNumFactors; ++f) {
      const auto &values = spec.factor(f).values;
      scaled[f].resize(values.size());
      for (size_t i = 0; i < values.size(); ++i) scaled[f][i] = model.u[f] * values[i];
    }
  }

  double P1(int f, int i) const { return scaled[f][i]; }
  double P2(int f, int i, int j, int dj) const {
    return scaled[f][static_cast<size_t>(i) * dj + j];
  }
  double P3(int f, int i, int j, int k, int dj, int dk) const {
    return scaled[f][(static_cast<size_t>(i) * dj + j) * dk + k];
  }
};

}  // namespace

Configuration MakeConfig(int m, int a, int o, int s) {
  Configuration c;
  c.y = {m, a, o, s};
  return c;
}

GraphSpec::GraphSpec(std::array<int, kNumConcepts> dims, std::vector<PotentialTensor> tensors,
                     int feature_dim)
    : dims_(dims), feature_dim_(feature_dim) {
  for (int d : dims_) {
    if (d <= 0) throw Error(ErrorCode::kInvalidArgument, "vocabulary sizes must be positive");
  }
  if (feature_dim < 0) throw Error(ErrorCode::kInvalidArgument, "negative feature dimension");
  std::array<bool, kNumFactors> seen{};
  for (auto &t : tensors) {
    const int f = FactorIndex(t.relation);
    if (f < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "relation " + t.relation.Name() + " is not a factor of the graph");
    }
    if (seen[f]) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate tensor for " + t.relation.Name());
    }
    const auto kinds = t.relation.kinds();
    size_t cells = 1;
    if (t.dims.size() != kinds.size()) {
      throw Error(ErrorCode::kInvalidArgument, "tensor " + t.relation.Name() + " has wrong rank");
    }
    for (size_t p = 0; p < kinds.size(); ++p) {
      if (t.dims[p] != dims_[Index(kinds[p])]) {
        throw Error(ErrorCode::kVocabularyMismatch,
                    "tensor " + t.relation.Name() + " dims do not match the vocabularies");
      }
      cells *= static_cast<size_t>(t.dims[p]);
    }
    if (cells != t.values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "tensor " + t.relation.Name() + " is truncated");
    }
    for (double v : t.values) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "tensor " + t.relation.Name() + " has non-finite values");
      }
    }
    seen[f] = true;
    factors_[f] = std::move(t);
  }
  for (int f = 0; f < kNumFactors; ++f) {
    if (!seen[f]) {
      throw Error(ErrorCode::kMissingTemplate,
                  "no tensor for factor " + DefaultFactorList()[f].Name());
    }
  }
}

size_t GraphSpec::num_configs() const {
  size_t n = 1;
  for (int d : dims_) n *= static_cast<size_t>(d);
  return n;
}

bool GraphSpec::Contains(const Configuration &y) const {
  for (int c = 0; c < kNumConcepts; ++c) {
    if (y.y[c] < 0 || y.y[c] >= dims_[c]) return false;
  }
  return true;
}

std::array<double, kNumFactors> GraphSpec::FactorValues(const Configuration &y) const {
  std::array<double, kNumFactors> out{};
  for (int f = 0; f < kNumFactors; ++f) {
    const auto &t = factors_[f];
    const auto kinds = t.relation.kinds();
    std::array<int, 3> idx{};
    for (size_t p = 0; p < kinds.size(); ++p) idx[p] = y[kinds[p]];
    out[f] = t.values[t.Offset(std::span<const int>(idx.data(), kinds.size()))];
  }
  return out;
}

// Grouping here must match ScoreTable's loop nest term for term, so both
// paths produce bit-identical scores.
double ScoreConfig(const GraphSpec &spec, const Model &model, std::span<const double> features,
                   const Configuration &y) {
  if (!spec.Contains(y)) throw Error(ErrorCode::kInvalidArgument, "configuration out of range");
  const ScoringTerms t(spec, model, features);
  const int m = y.y[kMot], a = y.y[kAct], o = y.y[kObj], s = y.y[kScn];
  const int da = t.dims[kAct], d_o = t.dims[kObj], ds = t.dims[kScn];

  const double term_m = t.vision[kMot][m] + t.P1(kM, m);
  const double term_a = (t.vision[kAct][a] + t.P1(kA, a)) + t.P2(kMA, m, a, da);
  const double term_o =
      (((t.vision[kObj][o] + t.P1(kO, o)) + t.P2(kMO, m, o, d_o)) + t.P2(kAO, a, o, d_o)) +
      t.P3(kMAO, m, a, o, da, d_o);
  const double term_s =
      (((((t.vision[kScn][s] + t.P1(kS, s)) + t.P2(kMS, m, s, ds)) + t.P2(kAS, a, s, ds)) +
        t.P3(kMAS, m, a, s, da, ds)) +
       t.P2(kOS, o, s, ds)) +
      t.P3(kAOS, a, o, s, d_o, ds);
  return ((term_m + term_a) + term_o) + term_s;
}

ScoreTable::ScoreTable(const GraphSpec &spec, const Model &model, std::span<const double> features,
                       const Clamp &clamp)
    : dims_(spec.dims()) {
  for (int c = 0; c < kNumConcepts; ++c) {
    if (clamp[c]) {
      if (*clamp[c] < 0 || *clamp[c] >= dims_[c]) {
        throw Error(ErrorCode::kInvalidArgument,
                    "clamp index out of bounds for " + std::string(ConceptName(kAllConcepts[c])));
      }
      lo_[c] = *clamp[c];
      extent_[c] = 1;
    } else {
      lo_[c] = 0;
      extent_[c] = dims_[c];
    }
  }
  const ScoringTerms t(spec, model, features);
  const int da = dims_[kAct], d_o = dims_[kObj], ds = dims_[kScn];
  scores_.resize(static_cast<size_t>(extent_[0]) * extent_[1] * extent_[2] * extent_[3]);

  const int s_lo = lo_[kScn], s_n = extent_[kScn];
  const int o_lo = lo_[kObj], o_n = extent_[kObj];
  std::vector<double> base_s(s_n), ms_s(s_n), mas_s(s_n), mao_o(o_n);
  for (int j = 0; j < s_n; ++j) {
    const int s = s_lo + j;
    base_s[j] = t.vision[kScn][s] + t.P1(kS, s);
  }
  std::vector<double> base_o(o_n);
  for (int j = 0; j < o_n; ++j) {
    const int o = o_lo + j;
    base_o[j] = t.vision[kObj][o] + t.P1(kO, o);
  }

  double *out = scores_.data();
  for (int m = lo_[kMot]; m < lo_[kMot] + extent_[kMot]; ++m) {
    const double term_m = t.vision[kMot][m] + t.P1(kM, m);
    for (int j = 0; j < s_n; ++j) ms_s[j] = base_s[j] + t.P2(kMS, m, s_lo + j, ds);
    for (int a = lo_[kAct]; a < lo_[kAct] + extent_[kAct]; ++a) {
      const double term_a = (t.vision[kAct][a] + t.P1(kA, a)) + t.P2(kMA, m, a, da);
      const double acc_a = term_m + term_a;
      for (int j = 0; j < s_n; ++j) {
        const int s = s_lo + j;
        mas_s[j] = (ms_s[j] + t.P2(kAS, a, s, ds)) + t.P3(kMAS, m, a, s, da, ds);
      }
      for (int jo = 0; jo < o_n; ++jo) {
        const int o = o_lo + jo;
        const double term_o = ((base_o[jo] + t.P2(kMO, m, o, d_o)) + t.P2(kAO, a, o, d_o)) +
                              t.P3(kMAO, m, a, o, da, d_o);
        const double acc_o = acc_a + term_o;
        const double *os_row = t.scaled[kOS].data() + static_cast<size_t>(o) * ds + s_lo;
        const double *aos_row =
            t.scaled[kAOS].data() + (static_cast<size_t>(a) * d_o + o) * ds + s_lo;
        for (int j = 0; j < s_n; ++j) {
          *out++ = acc_o + ((mas_s[j] + os_row[j]) + aos_row[j]);
        }
      }
    }
  }
}

Configuration ScoreTable::ConfigAt(size_t i) const {
  Configuration c;
  for (int k = kNumConcepts - 1; k >= 0; --k) {
    c.y[k] = lo_[k] + static_cast<int>(i % extent_[k]);
    i /= extent_[k];
  }
  return c;
}

bool ScoreTable::InBox(const Configuration &y) const {
  for (int c = 0; c < kNumConcepts; ++c) {
    if (y.y[c] < lo_[c] || y.y[c] >= lo_[c] + extent_[c]) return false;
  }
  return true;
}

std::optional<size_t> ScoreTable::IndexOf(const Configuration &y) const {
  if (!InBox(y)) return std::nullopt;
  size_t i = 0;
  for (int c = 0; c < kNumConcepts; ++c) {
    i = i * static_cast<size_t>(extent_[c]) + static_cast<size_t>(y.y[c] - lo_[c]);
  }
  return i;
}

std::vector<ScoredConfig> ScoreTable::KBest(int k,
                                            const std::optional<Configuration> &exclude) const {
  size_t skip = scores_.size();
  if (exclude) skip = IndexOf(*exclude).value_or(scores_.size());
  const size_t available = scores_.size() - (skip < scores_.size() ? 1 : 0);
  if (k < 1 || static_cast<size_t>(k) > available) {
    throw Error(ErrorCode::kInvalidArgument,
                "K=" + std::to_string(k) + " outside [1, " + std::to_string(available) + "]");
  }
  // Min-heap on "goodness": the top is the current K-th best. Entries are
  // visited in index order, so an equal score never displaces the top.
  using Entry = std::pair<double, size_t>;
  auto better = [](const Entry &x, const Entry &y) {
    return x.first > y.first || (x.first == y.first && x.second < y.second);
  };
  std::vector<Entry> heap;
  heap.reserve(static_cast<size_t>(k) + 1);
  for (size_t i = 0; i < scores_.size(); ++i) {
    if (i == skip) continue;
    const double s = scores_[i];
    if (heap.size() < static_cast<size_t>(k)) {
      heap.emplace_back(s, i);
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (s > heap.front().first) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = {s, i};
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }
  std::sort(heap.begin(), heap.end(), better);
  std::vector<ScoredConfig> out;
  out.reserve(heap.size());
  for (const auto &[s, i] : heap) out.push_back({ConfigAt(i), s});
  return out;
}

std::vector<double> ScoreTable::MaxMarginals(ConceptKind kind) const {
  const int c = Index(kind);
  std::vector<double> out(dims_[c], -std::numeric_limits<double>::infinity());
  size_t inner = 1;
  for (int k = c + 1; k < kNumConcepts; ++k) inner *= static_cast<size_t>(extent_[k]);
  const size_t period = inner * static_cast<size_t>(extent_[c]);
  for (size_t i = 0; i < scores_.size(); ++i) {
    const int v = lo_[c] + static_cast<int>((i % period) / inner);
    out[v] = std::max(out[v], scores_[i]);
  }
  return out;
}

std::vector<ScoredConfig> KBest(const GraphSpec &spec, const Model &model,
                                std::span<const double> features, int k,
                                const std::optional<Configuration> &exclude) {
  return ScoreTable(spec, model, features).KBest(k, exclude);
}

std::vector<double> MaxMarginals(const GraphSpec &spec, const Model &model,
                                 std::span<const double> features, ConceptKind kind) {
  return ScoreTable(spec, model, features).MaxMarginals(kind);
}

std::vector<ScoredConfig> ClampedKBest(const GraphSpec &spec, const Model &model,
                                       std::span<const double> features, const Clamp &clamp,
                                       int k) {
  return ScoreTable(spec, model, features, clamp).KBest(k);
}

}  // namespace whyact
