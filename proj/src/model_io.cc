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

#include "whyact/model_io.h"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "whyact/binary_io.h"
#include "whyact/error.h"

namespace whyact {

using nlohmann::json;

namespace {

json MatrixToJson(const Matrix &m) {
  json rows = json::array();
  for (int r = 0; r < m.rows; ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

void CheckFinite(const std::vector<double> &v, const std::string &what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kFormatError, what + " has non-finite values");
  }
}

Matrix MatrixFromJson(const json &j, int cols, const std::string &what) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<int>(rows.size()), cols);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != cols) {
      throw Error(ErrorCode::kFormatError, what + " row " + std::to_string(r) + " has " +
                                               std::to_string(rows[r].size()) +
                                               " columns, expected " + std::to_string(cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(static_cast<int>(r)).begin());
  }
  CheckFinite(m.data, what);
  return m;
}

json PcaToJson(const PcaProjection &p) {
  json j;
  j["version"] = kPcaVersion;
  j["input_dim"] = p.input_dim();
  j["output_dim"] = p.output_dim();
  j["padded_components"] = p.padded_components;
  j["mean"] = p.mean;
  j["explained_variance"] = p.explained_variance;
  j["components"] = MatrixToJson(p.components);
  return j;
}

PcaProjection PcaFromJson(const json &j) {
  if (j.at("version") != kPcaVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported PCA version");
  }
  PcaProjection p;
  p.mean = j.at("mean").get<std::vector<double>>();
  p.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  p.padded_components = j.at("padded_components").get<int>();
  p.components =
      MatrixFromJson(j.at("components"), static_cast<int>(p.mean.size()), "PCA components");
  if (j.at("input_dim").get<int>() != p.input_dim() ||
      j.at("output_dim").get<int>() != p.output_dim() ||
      p.explained_variance.size() != static_cast<size_t>(p.output_dim())) {
    throw Error(ErrorCode::kFormatError, "PCA shapes are inconsistent");
  }
  CheckFinite(p.mean, "PCA mean");
  return p;
}

json HashesToJson(const std::array<std::optional<uint64_t>, kNumConcepts> &hashes) {
  json j = json::object();
  for (ConceptKind k : kAllConcepts) {
    const auto &h = hashes[Index(k)];
    j[std::string(ConceptName(k))] = h ? json(HashToHex(*h)) : json(nullptr);
  }
  return j;
}

std::array<std::optional<uint64_t>, kNumConcepts> HashesFromJson(const json &j) {
  std::array<std::optional<uint64_t>, kNumConcepts> out;
  for (ConceptKind k : kAllConcepts) {
    const std::string name(ConceptName(k));
    if (j.contains(name) && !j.at(name).is_null()) {
      out[Index(k)] = HexToHash(j.at(name).get<std::string>());
    }
  }
  return out;
}

json OptionalNumber(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

std::optional<double> NumberOrNull(const json &j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

template <typename Fn>
auto ParseJson(std::istream &in, const std::string &what, Fn &&fn) -> decltype(fn(json())) {
  try {
    const json j = json::parse(in);
    return fn(j);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kFormatError, "bad " + what + " file: " + e.what());
  }
}

void WriteJson(std::ostream &out, const json &j) {
  out << j.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed");
}

template <typename T, typename Writer>
void WriteFile(const std::string &path, const T &value, Writer &&writer) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path);
  writer(out, value);
}

template <typename Reader>
auto ReadFile(const std::string &path, Reader &&reader) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return reader(in);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace

void WriteModel(std::ostream &out, const ModelBundle &bundle) {
  const Model &m = bundle.model;
  json meta;
  meta["feature_dim"] = m.feature_dim;
  std::vector<int> dims;
  for (const auto &w : m.weights) dims.push_back(w.rows);
  meta["dims"] = dims;
  meta["C"] = m.C;
  meta["vocabulary_hashes"] = HashesToJson(m.vocab_hashes);
  json factors = json::array();
  const auto &list = DefaultFactorList();
  for (int f = 0; f < kNumFactors; ++f) {
    json entry;
    entry["relation"] = list[f].Name();
    entry["enabled"] = static_cast<bool>(m.factor_mask[f]);
    if (static_cast<size_t>(f) < m.tensor_normalization.size()) {
      const auto &n = m.tensor_normalization[f];
      entry["mean"] = n.mean;
      entry["std"] = n.stddev;
      entry["standardized"] = n.standardized;
    }
    factors.push_back(entry);
  }
  meta["factors"] = factors;
  json log = json::array();
  for (const auto &p : m.training_log) {
    json e;
    e["pass"] = p.pass;
    e["constraints_added"] = p.constraints_added;
    e["working_set_size"] = p.working_set_size;
    e["primal_objective"] = p.primal_objective;
    e["training_loss"] = p.training_loss;
    e["working_set_objective"] = OptionalNumber(p.working_set_objective);
    e["dual_objective"] = OptionalNumber(p.dual_objective);
    log.push_back(e);
  }
  meta["training_log"] = log;

  json j;
  j["version"] = kModelVersion;
  j["metadata"] = meta;
  json w = json::object();
  for (ConceptKind k : kAllConcepts) {
    w[std::string(ConceptName(k))] = MatrixToJson(m.weights[Index(k)]);
  }
  j["W"] = w;
  j["u"] = std::vector<double>(m.u.begin(), m.u.end());
  j["pca"] = bundle.pca ? PcaToJson(*bundle.pca) : json(nullptr);
  WriteJson(out, j);
}

ModelBundle ReadModel(std::istream &in) {
  return ParseJson(in, "model", [](const json &j) {
    if (j.at("version") != kModelVersion) {
      throw Error(ErrorCode::kFormatError, "unsupported model version");
    }
    ModelBundle b;
    Model &m = b.model;
    const json &meta = j.at("metadata");
    m.feature_dim = meta.at("feature_dim").get<int>();
    const auto dims = meta.at("dims").get<std::vector<int>>();
    if (dims.size() != kNumConcepts || m.feature_dim < 0) {
      throw Error(ErrorCode::kFormatError, "bad model shape");
    }
    m.C = meta.at("C").get<double>();
    m.vocab_hashes = HashesFromJson(meta.at("vocabulary_hashes"));
    const json &factors = meta.at("factors");
    if (factors.size() != kNumFactors) {
      throw Error(ErrorCode::kFormatError, "model must list 13 factors");
    }
    const auto &list = DefaultFactorList();
    for (int f = 0; f < kNumFactors; ++f) {
      const json &e = factors[f];
      if (e.at("relation").get<std::string>() != list[f].Name()) {
        throw Error(ErrorCode::kFormatError, "model factor order differs from the graph");
      }
      m.factor_mask[f] = e.at("enabled").get<bool>();
      if (e.contains("mean")) {
        Normalization n;
        n.mean = e.at("mean").get<double>();
        n.stddev = e.at("std").get<double>();
        n.standardized = e.at("standardized").get<bool>();
        m.tensor_normalization.push_back(n);
      }
    }
    if (!m.tensor_normalization.empty() && m.tensor_normalization.size() != kNumFactors) {
      throw Error(ErrorCode::kFormatError, "partial tensor normalization in model");
    }
    for (const auto &e : meta.at("training_log")) {
      PassLog p;
      p.pass = e.at("pass").get<int>();
      p.constraints_added = e.at("constraints_added").get<int>();
      p.working_set_size = e.at("working_set_size").get<int>();
      p.primal_objective = e.at("primal_objective").get<double>();
      p.training_loss = e.at("training_loss").get<double>();
      p.working_set_objective = NumberOrNull(e.at("working_set_objective"));
      p.dual_objective = NumberOrNull(e.at("dual_objective"));
      m.training_log.push_back(p);
    }
    for (ConceptKind k : kAllConcepts) {
      const std::string name(ConceptName(k));
      m.weights[Index(k)] = MatrixFromJson(j.at("W").at(name), m.feature_dim, "W_" + name);
      if (m.weights[Index(k)].rows != dims[Index(k)] || dims[Index(k)] <= 0) {
        throw Error(ErrorCode::kFormatError, "W_" + name + " row count disagrees with dims");
      }
    }
    const auto u = j.at("u").get<std::vector<double>>();
    if (u.size() != kNumFactors) throw Error(ErrorCode::kFormatError, "u must have 13 entries");
    CheckFinite(u, "u");
    std::copy(u.begin(), u.end(), m.u.begin());
    if (!j.at("pca").is_null()) {
      b.pca = PcaFromJson(j.at("pca"));
      if (b.pca->output_dim() != m.feature_dim) {
        throw Error(ErrorCode::kFormatError, "embedded PCA output does not match the model");
      }
    }
    return b;
  });
}

void WriteModelFile(const std::string &path, const ModelBundle &bundle) {
  WriteFile(path, bundle, [](std::ostream &o, const ModelBundle &b) { WriteModel(o, b); });
}

ModelBundle ReadModelFile(const std::string &path) {
  return ReadFile(path, [](std::istream &i) { return ReadModel(i); });
}

void WriteBaseline(std::ostream &out, const BaselineBundle &bundle) {
  const MulticlassModel &m = bundle.model;
  json j;
  j["version"] = kBaselineVersion;
  j["mode"] = m.mode == MulticlassMode::kOneVsRest ? "one-vs-rest" : "crammer-singer";
  j["C"] = m.C;
  j["classes"] = m.weights.rows;
  j["feature_dim"] = m.weights.cols;
  j["motivation_hash"] =
      bundle.motivation_hash ? json(HashToHex(*bundle.motivation_hash)) : json(nullptr);
  j["oracle"] = m.oracle_mask == 0 ? json(nullptr) : json(Relation::FromMask(m.oracle_mask).Name());
  j["oracle_dims"] = std::vector<int>(m.oracle_dims.begin(), m.oracle_dims.end());
  j["weights"] = MatrixToJson(m.weights);
  j["pca"] = bundle.pca ? PcaToJson(*bundle.pca) : json(nullptr);
  WriteJson(out, j);
}

BaselineBundle ReadBaseline(std::istream &in) {
  return ParseJson(in, "baseline", [](const json &j) {
    if (j.at("version") != kBaselineVersion) {
      throw Error(ErrorCode::kFormatError, "unsupported baseline version");
    }
    BaselineBundle b;
    MulticlassModel &m = b.model;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "one-vs-rest") {
      m.mode = MulticlassMode::kOneVsRest;
    } else if (mode == "crammer-singer") {
      m.mode = MulticlassMode::kCrammerSinger;
    } else {
      throw Error(ErrorCode::kFormatError, "unknown baseline mode '" + mode + "'");
    }
    m.C = j.at("C").get<double>();
    if (!j.at("motivation_hash").is_null()) {
      b.motivation_hash = HexToHash(j.at("motivation_hash").get<std::string>());
    }
    if (!j.at("oracle").is_null()) {
      const auto r = Relation::Parse(j.at("oracle").get<std::string>());
      if (!r) throw Error(ErrorCode::kFormatError, "bad oracle relation");
      m.oracle_mask = r->mask();
    }
    const auto od = j.at("oracle_dims").get<std::vector<int>>();
    if (od.size() != kNumConcepts) throw Error(ErrorCode::kFormatError, "bad oracle_dims");
    std::copy(od.begin(), od.end(), m.oracle_dims.begin());
    m.weights = MatrixFromJson(j.at("weights"), j.at("feature_dim").get<int>(), "weights");
    if (m.weights.rows != j.at("classes").get<int>()) {
      throw Error(ErrorCode::kFormatError, "baseline class count disagrees with weights");
    }
    if (!j.at("pca").is_null()) b.pca = PcaFromJson(j.at("pca"));
    return b;
  });
}

void WriteBaselineFile(const std::string &path, const BaselineBundle &bundle) {
  WriteFile(path, bundle, [](std::ostream &o, const BaselineBundle &b) { WriteBaseline(o, b); });
}

BaselineBundle ReadBaselineFile(const std::string &path) {
  return ReadFile(path, [](std::istream &i) { return ReadBaseline(i); });
}

void WritePca(std::ostream &out, const PcaProjection &p) { WriteJson(out, PcaToJson(p)); }

PcaProjection ReadPca(std::istream &in) {
  return ParseJson(in, "PCA", [](const json &j) { return PcaFromJson(j); });
}

void WritePcaFile(const std::string &path, const PcaProjection &p) {
  WriteFile(path, p, [](std::ostream &o, const PcaProjection &q) { WritePca(o, q); });
}

PcaProjection ReadPcaFile(const std::string &path) {
  return ReadFile(path, [](std::istream &i) { return ReadPca(i); });
}

}  // namespace whyact
