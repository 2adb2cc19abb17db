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

#ifndef NNREPAIR_MODEL_H
#define NNREPAIR_MODEL_H

#include <optional>
#include <string>
#include <vector>

#include "nnrepair/layer.h"
#include "nnrepair/shape.h"

namespace nnrepair
{

class CycleError : public InvalidModel
{
public:
  using InvalidModel::InvalidModel;
};

class UnknownTarget : public InvalidModel
{
public:
  using InvalidModel::InvalidModel;
};

/// A model input. Inputs with a fill value are constants added by repairs.
struct ModelInput
{
  std::string id;
  TensorShape shape;
  std::optional<double> fill;

  bool operator==(const ModelInput &) const = default;
};

/**
 * DAG of layer nodes. Edges are the ids listed in LayerNode::inputs and may
 * name either another node or a model input.
 */
struct ModelGraph
{
  std::string name;
  std::vector<ModelInput> inputs;
  std::vector<LayerNode> nodes;
  std::vector<std::string> outputs;

  const LayerNode *find_node(std::string_view id) const;
  LayerNode *find_node(std::string_view id);
  const ModelInput *find_input(std::string_view id) const;
  bool contains(std::string_view id) const { return find_node(id) || find_input(id); }
};

/**
 * Kahn order in which, among ready nodes, the one declared earliest in
 * `nodes` runs first. Throws CycleError or UnknownTarget.
 */
std::vector<std::string> topo_order(const ModelGraph &model);

/// Throws InvalidModel (or a subclass) on the first broken graph invariant.
void validate_model(const ModelGraph &model);

/**
 * Equality by node id: kinds, attributes, weight shapes, wiring, inputs and
 * outputs. Declaration order and weight values are not compared.
 */
bool structurally_equal(const ModelGraph &a, const ModelGraph &b);

/// Canonical string for structurally_equal; equal keys iff structurally equal.
std::string structural_key(const ModelGraph &model);

} // namespace nnrepair

#endif // NNREPAIR_MODEL_H
