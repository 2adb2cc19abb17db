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

#include "nnrepair/edit.h"

#include <cstdio>
#include <set>

namespace nnrepair
{

namespace
{

template <class... Ts> struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

LayerNode &require_node(ModelGraph &model, const std::string &id)
{
  auto *node = model.find_node(id);
  if (!node)
    throw UnknownTarget("no layer with id '" + id + "'");
  return *node;
}

std::string render_attrs(const LayerNode &node)
{
  std::string out;
  for (const auto &[name, value] : node.attrs)
  {
    if (!out.empty())
      out += ", ";
    out += name + "=" + format_attr(value);
  }
  return out;
}

std::string render_weights(const std::shared_ptr<const WeightSpec> &w)
{
  if (!w)
    return "none";
  std::string out = "kernel ";
  out += w->kernel ? format_list(w->kernel->shape) : "-";
  out += ", bias ";
  out += w->bias ? format_list(w->bias->shape) : "-";
  return out;
}

} // namespace

EditKind edit_kind(const Edit &edit) { return static_cast<EditKind>(edit.index()); }

std::string_view edit_kind_name(EditKind kind)
{
  switch (kind)
  {
    case EditKind::ArgChange:
      return "ArgChange";
    case EditKind::WeightRegen:
      return "WeightRegen";
    case EditKind::ReplaceLayer:
      return "ReplaceLayer";
    case EditKind::InsertLayer:
      return "InsertLayer";
    case EditKind::InsertConstInput:
      return "InsertConstInput";
  }
  return "?";
}

const std::string &edit_subject(const Edit &edit)
{
  return std::visit(Overloaded{
                      [](const ArgChange &e) -> const std::string & { return e.node; },
                      [](const WeightRegen &e) -> const std::string & { return e.node; },
                      [](const ReplaceLayer &e) -> const std::string & { return e.node; },
                      [](const InsertLayer &e) -> const std::string & { return e.layer.id; },
                      [](const InsertConstInput &e) -> const std::string & { return e.id; },
                    },
                    edit);
}

std::string describe_edit(const Edit &edit)
{
  return std::visit(
    Overloaded{
      [](const ArgChange &e) {
        return "ArgChange(" + e.node + "." + e.attr + ": " + (e.old_value ? format_attr(*e.old_value) : "default") +
               " -> " + (e.new_value ? format_attr(*e.new_value) : "default") + ")";
      },
      [](const WeightRegen &e) { return "WeightRegen(" + e.node + ": " + render_weights(e.weights) + ")"; },
      [](const ReplaceLayer &e) {
        return "ReplaceLayer(" + e.node + ": " + std::string{kind_name(e.replacement.kind)} + "(" +
               render_attrs(e.replacement) + "))";
      },
      [](const InsertLayer &e) {
        std::string extra;
        for (const auto &src : e.layer.inputs)
          extra += ", +" + src;
        return "InsertLayer(" + e.layer.id + ": " + std::string{kind_name(e.layer.kind)} + "(" +
               render_attrs(e.layer) + ") before " + e.before + "[" + std::to_string(e.edge) + "]" + extra + ")";
      },
      [](const InsertConstInput &e) {
        char fill[32];
        std::snprintf(fill, sizeof fill, "%g", e.fill);
        return "InsertConstInput(" + e.id + ": " + e.shape.to_string() + " = " + fill + ")";
      },
    },
    edit);
}

ModelGraph apply_edit(const ModelGraph &model, const Edit &edit)
{
  ModelGraph out = model;
  std::visit(Overloaded{
               [&](const ArgChange &e) {
                 auto &node = require_node(out, e.node);
                 if (e.new_value)
                   node.attrs[e.attr] = *e.new_value;
                 else
                   node.attrs.erase(e.attr);
               },
               [&](const WeightRegen &e) { require_node(out, e.node).weights = e.weights; },
               [&](const ReplaceLayer &e) {
                 auto &node = require_node(out, e.node);
                 LayerNode replacement = e.replacement;
                 replacement.id = node.id;
                 if (replacement.inputs.empty())
                   replacement.inputs = node.inputs;
                 node = std::move(replacement);
               },
               [&](const InsertLayer &e) {
                 auto &target = require_node(out, e.before);
                 if (e.edge >= target.inputs.size())
                   throw UnknownTarget("layer '" + e.before + "' has no input edge " + std::to_string(e.edge));
                 if (out.contains(e.layer.id))
                   throw InvalidModel("inserted layer id '" + e.layer.id + "' already exists");
                 LayerNode layer = e.layer;
                 layer.inputs.insert(layer.inputs.begin(), target.inputs[e.edge]);
                 target.inputs[e.edge] = layer.id;
                 auto pos = out.nodes.begin();
                 while (pos->id != e.before)
                   ++pos;
                 out.nodes.insert(pos, std::move(layer));
               },
               [&](const InsertConstInput &e) {
                 if (out.contains(e.id))
                   throw InvalidModel("constant input id '" + e.id + "' already exists");
                 out.inputs.push_back(ModelInput{e.id, e.shape, e.fill});
               },
             },
             edit);
  return out;
}

ModelGraph apply_edits(const ModelGraph &model, std::span<const Edit> edits)
{
  ModelGraph out = model;
  for (const auto &e : edits)
    out = apply_edit(out, e);
  return out;
}

std::vector<Edit> graph_diff(const ModelGraph &before, const ModelGraph &after)
{
  for (const auto &in : before.inputs)
    if (!after.find_input(in.id))
      throw InvalidModel("graph_diff: input '" + in.id + "' was removed");
  for (const auto &node : before.nodes)
    if (!after.find_node(node.id))
      throw InvalidModel("graph_diff: layer '" + node.id + "' was removed");
  if (before.outputs != after.outputs)
    throw InvalidModel("graph_diff: model outputs differ");

  const auto order = topo_order(after);
  std::vector<Edit> edits;
  ModelGraph work = before;
  std::set<std::string> emitted_inputs;

  auto emit = [&](Edit e) {
    work = apply_edit(work, e);
    edits.push_back(std::move(e));
  };

  auto emit_new_inputs = [&](const LayerNode &node) {
    for (const auto &src : node.inputs)
    {
      if (before.find_input(src) || emitted_inputs.count(src))
        continue;
      if (const auto *in = after.find_input(src))
      {
        emitted_inputs.insert(src);
        emit(InsertConstInput{in->id, in->shape, in->fill.value_or(0.0)});
      }
    }
  };

  // First consumer edge of `id` in `after`, walking through other new layers
  // until a layer that exists in `before`.
  auto splice_point = [&](const std::string &id) -> std::optional<std::pair<std::string, std::size_t>> {
    std::string current = id;
    for (std::size_t guard = 0; guard <= after.nodes.size(); ++guard)
    {
      const LayerNode *consumer = nullptr;
      std::size_t edge = 0;
      for (const auto &cid : order)
      {
        const auto *c = after.find_node(cid);
        for (std::size_t i = 0; i < c->inputs.size(); ++i)
          if (c->inputs[i] == current)
          {
            consumer = c;
            edge = i;
            break;
          }
        if (consumer)
          break;
      }
      if (!consumer)
        return std::nullopt;
      if (before.find_node(consumer->id))
        return std::make_pair(consumer->id, edge);
      current = consumer->id;
    }
    return std::nullopt;
  };

  for (const auto &id : order)
  {
    const auto &target = *after.find_node(id);
    emit_new_inputs(target);
    const auto *old = before.find_node(id);
    if (!old)
    {
      auto point = splice_point(id);
      if (!point)
        throw InvalidModel("graph_diff: new layer '" + id + "' feeds no existing layer");
      LayerNode layer = target;
      layer.inputs.erase(layer.inputs.begin());
      emit(InsertLayer{std::move(layer), point->first, point->second});
      if (work.find_node(id)->inputs != target.inputs)
        emit(ReplaceLayer{id, target});
      continue;
    }

    const LayerNode current = *work.find_node(id);
    if (current.kind != target.kind || current.inputs != target.inputs)
    {
      emit(ReplaceLayer{id, target});
      continue;
    }
    std::set<std::string> names;
    for (const auto &[name, _] : current.attrs)
      names.insert(name);
    for (const auto &[name, _] : target.attrs)
      names.insert(name);
    for (const auto &name : names)
    {
      const auto *a = current.attr(name);
      const auto *b = target.attr(name);
      if (a && b && *a == *b)
        continue;
      emit(ArgChange{id, name, a ? std::optional<AttrValue>{*a} : std::nullopt,
                     b ? std::optional<AttrValue>{*b} : std::nullopt});
    }
    if (!same_weights(current.weights, target.weights))
      emit(WeightRegen{id, target.weights});
  }

  for (const auto &in : after.inputs)
    if (!work.find_input(in.id))
      emit(InsertConstInput{in.id, in.shape, in.fill.value_or(0.0)});
  return edits;
}

std::string make_node_id(std::string_view prefix, EditKind edit, std::string_view target, const ModelGraph &model)
{
  for (std::uint64_t counter = 0;; ++counter)
  {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s)
      {
        h ^= c;
        h *= 1099511628211ull;
      }
    };
    mix(edit_kind_name(edit));
    mix("|");
    mix(target);
    mix("|");
    mix(std::to_string(counter));
    char digits[8];
    std::snprintf(digits, sizeof digits, "%05u", static_cast<unsigned>(h % 100000));
    std::string id = std::string{prefix} + digits;
    if (!model.contains(id))
      return id;
  }
}

} // namespace nnrepair
