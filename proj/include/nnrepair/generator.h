/*
 * Copyright (c) 2026 The nnrepair Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NNREPAIR_GENERATOR_H
#define NNREPAIR_GENERATOR_H

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "nnrepair/diagnostic.h"
#include "nnrepair/edit.h"

namespace nnrepair
{

class NotInjectable : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Family
{
  Dense,
  Recurrent,
  Pooling,
  Conv,
  Mixed,
};

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view name);

/// Layer kinds a family draws from, merges excluded.
std::vector<LayerKind> family_kinds(Family family);

struct GenConfig
{
  std::uint64_t seed = 0;
  int layers_min = 3;
  int layers_max = 12;
  Family family = Family::Mixed;
  bool graph_mode = false;
  std::int64_t dim_min = 1;
  std::int64_t dim_max = 4;
  int inject_bugs = 0;
  /// Build a model that passes the shape checks. Implied by inject_bugs > 0.
  bool valid = false;
  /// Restrict to layers with value semantics.
  bool value_executable_only = false;
  /// Upper bound on elements per tensor in valid mode.
  std::int64_t max_elements = 4096;
};

/**
 * Random model, deterministic in cfg. Without `valid` (and no bugs to
 * inject) layers and arguments are composed freely and the result is
 * usually invalid. In valid mode every layer is sampled against its input
 * shape; bugs are then injected into distinct layers, redrawing the model
 * while none of its layers admits a bug.
 */
ModelGraph generate_model(const GenConfig &cfg);

struct Injection
{
  ModelGraph model;
  Edit edit;
};

/**
 * Breaks a valid model so that its first diagnostic has the requested kind
 * and sits at the corrupted layer:
 *   WeightShapeError    kernel's first axis grown by 1..3
 *   DimensionError      layer swapped for its family member one rank up (down for 3D)
 *   InputShapeMismatch  rank-changing Reshape on one merge input
 *   ArgumentError       strides and dilation both above one, a Reshape target
 *                       off by 1..3, or a Concatenate axis out of range
 *   WindowOverflow      pool/kernel 1..4 past the input, or cropping that
 *                       leaves nothing
 * Throws NotInjectable if no layer admits the kind.
 */
Injection inject_bug(std::uint64_t seed, const ModelGraph &model, ErrorKind kind);

/// Cost of undoing an injection with the repair vocabulary.
std::int64_t inverse_change_value(const Edit &injection);

} // namespace nnrepair

#endif // NNREPAIR_GENERATOR_H
