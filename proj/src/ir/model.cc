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

#include "nnrepair/model.h"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace nnrepair
{

const LayerNode *ModelGraph::find_node(std::string_view id) const
{
  for (const auto &n : nodes)
    if (n.id == id)
      return &n;
  return nullptr;
}

LayerNode *ModelGraph::find_node(std::string_view id)
{
  for (auto &n : nodes)
    if (n.id == id)
      return &n;
  return nullptr;
}

const ModelInput *ModelGraph::find_input(std::string_view id) const
{
  for (const auto &in : inputs)
    if (in.id == id)
      return &in;
  return nullptr;
}

std::vector<std::string> topo_order(const ModelGraph &model)
{
  std::unordered_map<std::string_view, std::size_t> index;
  std::unordered_set<std::string_view> input_ids;
  for (const auto &in : model.inputs)
    input_ids.insert(in.id);
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    index.emplace(model.nodes[i].id, i);

  std::vector<std::size_t> pending(model.nodes.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(model.nodes.size());
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
  {
    for (const auto &src : model.nodes[i].inputs)
    {
      if (auto it = index.find(src); it != index.end())
      {
        ++pending[i];
        consumers[it->second].push_back(i);
      }
      else if (!input_ids.count(src))
      {
        throw UnknownTarget("layer '" + model.nodes[i].id + "' references unknown id '" + src + "'");
      }
    }
  }

  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < pending.size(); ++i)
    if (pending[i] == 0)
      ready.insert(i);

  std::vector<std::string> order;
  order.reserve(model.nodes.size());
  while (!ready.empty())
  {
    const std::size_t next = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(model.nodes[next].id);
    for (auto c : consumers[next])
      if (--pending[c] == 0)
        ready.insert(c);
  }
  if (order.size() != model.nodes.size())
  {
    for (std::size_t i = 0; i < pending.size(); ++i)
      if (pending[i] > 0)
        throw CycleError("cycle through layer '" + model.nodes[i].id + "'");
  }
  return order;
}

void validate_model(const ModelGraph &model)
{
  if (model.inputs.empty())
    throw InvalidModel("model has no inputs");
  if (model.outputs.empty())
    throw InvalidModel("model has no outputs");

  std::unordered_set<std::string_view> ids;
  for (const auto &in : model.inputs)
  {
    if (in.id.empty())
      throw InvalidModel("input with empty id");
    if (!ids.insert(in.id).second)
      throw InvalidModel("duplicate id '" + in.id + "'");
  }
  for (const auto &node : model.nodes)
  {
    if (!ids.insert(node.id).second)
      throw InvalidModel("duplicate id '" + node.id + "'");
    validate_node(node);
  }
  for (const auto &out : model.outputs)
    if (!model.find_node(out))
      throw UnknownTarget("output references unknown layer '" + out + "'");

  // Acyclic with resolved references; since every layer has at least one
  // input, that also makes every layer reachable from a model input.
  topo_order(model);
}

namespace
{

void append_array_shape(std::string &out, const std::optional<NdArray> &array)
{
  out += array ? format_list(array->shape) : "-";
}

} // namespace

std::string structural_key(const ModelGraph &model)
{
  std::string key;
  std::vector<const ModelInput *> inputs;
  for (const auto &in : model.inputs)
    inputs.push_back(&in);
  std::sort(inputs.begin(), inputs.end(), [](auto *a, auto *b) { return a->id < b->id; });
  for (const auto *in : inputs)
  {
    key += "I:" + in->id + ":" + in->shape.to_string();
    if (in->fill)
      key += "=" + std::to_string(*in->fill);
    key += ';';
  }

  std::vector<const LayerNode *> nodes;
  for (const auto &n : model.nodes)
    nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](auto *a, auto *b) { return a->id < b->id; });
  for (const auto *n : nodes)
  {
    key += "N:" + n->id + ":" + std::string{kind_name(n->kind)} + "{";
    for (const auto &[name, value] : n->attrs)
      key += name + "=" + format_attr(value) + ",";
    key += "}w";
    if (n->weights)
    {
      append_array_shape(key, n->weights->kernel);
      key += '/';
      append_array_shape(key, n->weights->bias);
    }
    key += "<";
    for (const auto &src : n->inputs)
      key += src + ",";
    key += ">;";
  }
  key += "O:";
  for (const auto &out : model.outputs)
    key += out + ",";
  return key;
}

bool structurally_equal(const ModelGraph &a, const ModelGraph &b) { return structural_key(a) == structural_key(b); }

} // namespace nnrepair
