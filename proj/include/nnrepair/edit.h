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

#ifndef NNREPAIR_EDIT_H
#define NNREPAIR_EDIT_H

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nnrepair/model.h"

namespace nnrepair
{

/// Sets (or, with no new value, removes) one attribute.
struct ArgChange
{
  std::string node;
  std::string attr;
  std::optional<AttrValue> old_value;
  std::optional<AttrValue> new_value;
};

struct WeightRegen
{
  std::string node;
  std::shared_ptr<const WeightSpec> weights;
};

/// Replaces the node in place. The id is kept; kind, attrs, weights and
/// inputs come from the replacement.
struct ReplaceLayer
{
  std::string node;
  LayerNode replacement;
};

/**
 * Splices `layer` into edge `edge` of node `before`. The inserted layer's
 * inputs become the edge's old source followed by whatever `layer.inputs`
 * lists (e.g. a constant for Concatenate); the edge then points at the layer.
 * The layer is declared right before `before`.
 */
struct InsertLayer
{
  LayerNode layer;
  std::string before;
  std::size_t edge = 0;
};

struct InsertConstInput
{
  std::string id;
  TensorShape shape;
  double fill = 0.0;
};

using Edit = std::variant<ArgChange, WeightRegen, ReplaceLayer, InsertLayer, InsertConstInput>;

/// Declared in tie-break order.
enum class EditKind
{
  ArgChange,
  WeightRegen,
  ReplaceLayer,
  InsertLayer,
  InsertConstInput,
};

EditKind edit_kind(const Edit &edit);
std::string_view edit_kind_name(EditKind kind);

/// The node the edit is about. For InsertConstInput that is the constant's id.
const std::string &edit_subject(const Edit &edit);

/// Deterministic one-line rendering; also the lexicographic tie-break key.
std::string describe_edit(const Edit &edit);

/// Returns a new graph; `model` is untouched. Throws UnknownTarget.
ModelGraph apply_edit(const ModelGraph &model, const Edit &edit);
ModelGraph apply_edits(const ModelGraph &model, std::span<const Edit> edits);

/**
 * Edits that turn `before` into `after`, matching nodes by id. New nodes
 * become InsertLayer (plus InsertConstInput for new constant inputs), kind or
 * wiring changes become ReplaceLayer, attribute changes ArgChange and weight
 * changes WeightRegen. Ordered by location in `after`, then edit kind.
 *
 * Node removal is not expressible as an edit; throws InvalidModel if a node
 * or input of `before` is missing from `after`.
 */
std::vector<Edit> graph_diff(const ModelGraph &before, const ModelGraph &after);

/**
 * `<kind prefix><5 digits>` id derived from (edit kind, target, counter),
 * bumping the counter until the id is free in `model`.
 */
std::string make_node_id(std::string_view prefix, EditKind edit, std::string_view target, const ModelGraph &model);

} // namespace nnrepair

#endif // NNREPAIR_EDIT_H
