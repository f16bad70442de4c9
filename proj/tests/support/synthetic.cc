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

#include "support/synthetic.h"

#include <cmath>
#include <numeric>

namespace whyact::testing {

namespace {

size_t Flat(const std::array<int, kNumConcepts> &d, const Configuration &y) {
  return ((static_cast<size_t>(y.y[0]) * d[1] + y.y[1]) * d[2] + y.y[2]) * d[3] + y.y[3];
}

}  // namespace

double World::p(const Configuration &y) const { return joint[Flat(options.dims, y)]; }

World MakeWorld(const WorldOptions &options) {
  World w;
  w.options = options;
  const auto &d = options.dims;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_m(0, d[0] - 1);

  // Context (a, o, s) with a skewed log-normal weight.
  std::vector<double> context(static_cast<size_t>(d[1]) * d[2] * d[3]);
  for (double &c : context) c = std::exp(1.2 * normal(rng));
  const double total = std::accumulate(context.begin(), context.end(), 0.0);
  for (double &c : context) c /= total;

  // The motivation follows an (a, o) rule or an (a, s) rule.
  std::vector<int> by_ao(static_cast<size_t>(d[1]) * d[2]);
  std::vector<int> by_as(static_cast<size_t>(d[1]) * d[3]);
  for (int &m : by_ao) m = pick_m(rng);
  for (int &m : by_as) m = pick_m(rng);

  w.joint.assign(static_cast<size_t>(d[0]) * d[1] * d[2] * d[3], 0.0);
  for (int a = 0; a < d[1]; ++a) {
    for (int o = 0; o < d[2]; ++o) {
      for (int s = 0; s < d[3]; ++s) {
        const double pc = context[(static_cast<size_t>(a) * d[2] + o) * d[3] + s];
        for (int m = 0; m < d[0]; ++m) {
          double pm = 0.15 / d[0];
          if (m == by_ao[static_cast<size_t>(a) * d[2] + o]) pm += 0.5;
          if (m == by_as[static_cast<size_t>(a) * d[3] + s]) pm += 0.35;
          w.joint[Flat(d, MakeConfig(m, a, o, s))] = pc * pm;
        }
      }
    }
  }

  for (int c = 0; c < kNumConcepts; ++c) {
    w.prototypes[c] = Matrix(d[c], options.feature_dim);
    for (double &v : w.prototypes[c].data) v = options.signal[c] * normal(rng);
  }
  return w;
}

std::vector<PotentialTensor> CooccurrenceTensors(const World &world) {
  const auto &d = world.options.dims;
  std::vector<PotentialTensor> out;
  for (const Relation &r : DefaultFactorList()) {
    PotentialTensor t;
    t.relation = r;
    const auto kinds = r.kinds();
    size_t cells = 1;
    for (ConceptKind k : kinds) {
      t.dims.push_back(d[Index(k)]);
      cells *= static_cast<size_t>(d[Index(k)]);
    }
    std::vector<double> marginal(cells, 0.0);
    for (int m = 0; m < d[0]; ++m) {
      for (int a = 0; a < d[1]; ++a) {
        for (int o = 0; o < d[2]; ++o) {
          for (int s = 0; s < d[3]; ++s) {
            const Configuration y = MakeConfig(m, a, o, s);
            std::vector<int> idx;
            for (ConceptKind k : kinds) idx.push_back(y[k]);
            marginal[t.Offset(idx)] += world.p(y);
          }
        }
      }
    }
    for (double p : marginal) t.values.push_back(std::log10(p + 1e-4 / cells));
    out.push_back(Standardize(t));
  }
  return out;
}

GraphSpec WorldGraph(const World &world) {
  return GraphSpec(world.options.dims, CooccurrenceTensors(world), world.options.feature_dim);
}

std::vector<Example> SampleExamples(const World &world, size_t n, std::mt19937_64 &rng,
                                    const std::string &prefix) {
  std::discrete_distribution<size_t> draw(world.joint.begin(), world.joint.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto &d = world.options.dims;
  std::vector<Example> out;
  for (size_t i = 0; i < n; ++i) {
    size_t flat = draw(rng);
    Example ex;
    ex.image_id = prefix + std::to_string(i);
    for (int c = kNumConcepts - 1; c >= 0; --c) {
      ex.truth.y[c] = static_cast<int>(flat % d[c]);
      flat /= d[c];
    }
    ex.features.assign(static_cast<size_t>(world.options.feature_dim), 0.0);
    for (double &v : ex.features) v = normal(rng);
    for (int c = 0; c < kNumConcepts; ++c) {
      const auto proto = world.prototypes[c].row(ex.truth.y[c]);
      for (size_t j = 0; j < ex.features.size(); ++j) ex.features[j] += proto[j];
    }
    out.push_back(std::move(ex));
  }
  return out;
}

VocabularySet WorldVocabularies(const World &world) {
  VocabularySet v;
  for (ConceptKind k : kAllConcepts) {
    std::vector<std::string> terms;
    for (int i = 0; i < world.options.dims[Index(k)]; ++i) {
      terms.push_back(std::string(ConceptName(k)) + " " + std::to_string(i));
    }
    v[Index(k)] = Vocabulary(k, terms);
  }
  return v;
}

}  // namespace whyact::testing
