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

#ifndef WHYACT_MODEL_IO_H_
#define WHYACT_MODEL_IO_H_

#include <array>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "whyact/learn.h"
#include "whyact/model.h"
#include "whyact/pca.h"

namespace whyact {

inline constexpr char kModelVersion[] = "why-model/1";
inline constexpr char kBaselineVersion[] = "why-baseline/1";
inline constexpr char kPcaVersion[] = "why-pca/1";

// A trained model plus the projection its features were reduced with.
struct ModelBundle {
  Model model;
  std::optional<PcaProjection> pca;
};

struct BaselineBundle {
  MulticlassModel model;
  std::optional<PcaProjection> pca;
  std::optional<uint64_t> motivation_hash;
};

// JSON text, pretty-printed with one-space indent and a trailing newline.
// Output depends only on the values, so equal models give equal bytes.
void WriteModel(std::ostream &out, const ModelBundle &bundle);
ModelBundle ReadModel(std::istream &in);
void WriteModelFile(const std::string &path, const ModelBundle &bundle);
ModelBundle ReadModelFile(const std::string &path);

void WriteBaseline(std::ostream &out, const BaselineBundle &bundle);
BaselineBundle ReadBaseline(std::istream &in);
void WriteBaselineFile(const std::string &path, const BaselineBundle &bundle);
BaselineBundle ReadBaselineFile(const std::string &path);

void WritePca(std::ostream &out, const PcaProjection &p);
PcaProjection ReadPca(std::istream &in);
void WritePcaFile(const std::string &path, const PcaProjection &p);
PcaProjection ReadPcaFile(const std::string &path);

}  // namespace whyact

#endif  // WHYACT_MODEL_IO_H_
