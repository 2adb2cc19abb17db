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

#include <cstdio>
#include <unordered_set>

#include "nnrepair/io.h"

namespace nnrepair
{

namespace
{

using json = nlohmann::json;

template <class... Ts> struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

std::string quoted(const std::string &text)
{
  std::string out = "\"";
  for (char c : text)
  {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string python_tuple(const IntList &dims)
{
  std::string out = "(";
  for (std::size_t i = 0; i < dims.size(); ++i)
    out += (i ? "," : "") + std::to_string(dims[i]);
  return out + (dims.size() == 1 ? ",)" : ")");
}

json fact_to_json(const Fact &fact)
{
  json out{{"label", fact.label}, {"values", fact.lists}};
  if (fact.number)
    out["number"] = *fact.number;
  return out;
}

json optional_attr(const std::optional<AttrValue> &value)
{
  if (!value)
    return nullptr;
  return std::visit([](const auto &v) { return json(v); }, *value);
}

json layer_summary(const LayerNode &node)
{
  json attrs = json::object();
  for (const auto &[name, value] : node.attrs)
    attrs[name] = std::visit([](const auto &v) { return json(v); }, value);
  json out{{"id", node.id}, {"kind", std::string{kind_name(node.kind)}}, {"attrs", attrs}, {"inputs", node.inputs}};
  if (node.weights)
  {
    json weights = json::object();
    if (node.weights->kernel)
      weights["kernel_shape"] = node.weights->kernel->shape;
    if (node.weights->bias)
      weights["bias_shape"] = node.weights->bias->shape;
    out["weights"] = weights;
  }
  return out;
}

} // namespace

std::string render_dot(const ModelGraph &model, const ShapeMap *shapes)
{
  std::unordered_set<std::string> layers;
  for (const auto &node : model.nodes)
    layers.insert(node.id);

  std::string out = "digraph " + quoted(model.name) + " {\n  node [shape=box];\n";
  for (const auto &node : model.nodes)
  {
    std::string label = node.id + "\\n" + std::string{kind_name(node.kind)};
    if (shapes)
      if (auto it = shapes->find(node.id); it != shapes->end())
        label += "\\nout:" + it->second.to_string();
    out += "  " + quoted(node.id) + " [label=\"" + label + "\"];\n";
  }
  for (const auto &node : model.nodes)
    for (const auto &src : node.inputs)
      if (layers.count(src))
        out += "  " + quoted(src) + " -> " + quoted(node.id) + ";\n";
  return out + "}\n";
}

std::string render_pseudocode(const ModelGraph &model)
{
  std::string out;
  for (const auto &in : model.inputs)
  {
    if (in.fill)
    {
      char fill[32];
      std::snprintf(fill, sizeof fill, "%g", *in.fill);
      out += in.id + " = Constant(shape=" + python_tuple(in.shape.without_batch()) + ", value=" + fill + ")\n";
    }
    else
    {
      out += in.id + " = Input(shape=" + python_tuple(in.shape.without_batch()) + ")\n";
    }
  }
  for (const auto &node : model.nodes)
  {
    std::string args;
    for (const auto &[name, value] : node.attrs)
      args += (args.empty() ? "" : ", ") + name + "=" + format_attr(value);
    std::string inputs;
    if (node.inputs.size() == 1)
      inputs = node.inputs[0];
    else
    {
      inputs = "[";
      for (std::size_t i = 0; i < node.inputs.size(); ++i)
        inputs += (i ? ", " : "") + node.inputs[i];
      inputs += "]";
    }
    out += node.id + " = " + std::string{kind_name(node.kind)} + "(" + args + ")(" + inputs + ")\n";
  }
  std::string outputs;
  for (std::size_t i = 0; i < model.outputs.size(); ++i)
    outputs += (i ? ", " : "") + model.outputs[i];
  return out + "outputs = [" + outputs + "]\n";
}

json edit_to_json(const Edit &edit)
{
  json out = std::visit(
    Overloaded{
      [](const ArgChange &e) -> json {
        return {{"node", e.node}, {"attr", e.attr}, {"old", optional_attr(e.old_value)},
                {"new", optional_attr(e.new_value)}};
      },
      [](const WeightRegen &e) -> json {
        json w{{"node", e.node}};
        if (e.weights && e.weights->kernel)
          w["kernel_shape"] = e.weights->kernel->shape;
        if (e.weights && e.weights->bias)
          w["bias_shape"] = e.weights->bias->shape;
        return w;
      },
      [](const ReplaceLayer &e) -> json { return {{"node", e.node}, {"layer", layer_summary(e.replacement)}}; },
      [](const InsertLayer &e) -> json {
        return {{"before", e.before}, {"edge", e.edge}, {"layer", layer_summary(e.layer)}};
      },
      [](const InsertConstInput &e) -> json {
        return {{"id", e.id}, {"shape", e.shape.without_batch()}, {"fill", e.fill}};
      },
    },
    edit);
  out["type"] = std::string{edit_kind_name(edit_kind(edit))};
  out["text"] = describe_edit(edit);
  return out;
}

json diagnostic_to_json(const Diagnostic &diag)
{
  json observed = json::array(), expected = json::array();
  for (const auto &f : diag.observed)
    observed.push_back(fact_to_json(f));
  for (const auto &f : diag.expected)
    expected.push_back(fact_to_json(f));
  return {{"kind", std::string{kind_key(diag.kind)}},
          {"layer_id", diag.layer_id},
          {"location", diag.location},
          {"badness", diag.badness},
          {"observed", observed},
          {"expected", expected},
          {"message", format_diagnostic(diag)}};
}

std::string candidate_file_name(std::size_t rank) { return "fix_" + std::to_string(rank) + ".json"; }

json report_to_json(const RepairReport &report, bool include_timing)
{
  json out;
  out["model"] = report.model_name;
  out["seed"] = report.seed;
  out["valid"] = !report.diagnostic.has_value();
  out["diagnostic"] = report.diagnostic ? diagnostic_to_json(*report.diagnostic) : json(nullptr);
  out["candidates"] = json::array();
  for (std::size_t i = 0; i < report.candidates.size(); ++i)
  {
    const auto &c = report.candidates[i];
    json edits = json::array();
    for (const auto &e : c.edits)
      edits.push_back(edit_to_json(e));
    json trace = json::array();
    for (const auto &d : c.trace)
      trace.push_back(diagnostic_to_json(d));
    out["candidates"].push_back({{"rank", i + 1},
                                 {"change_value", c.change_value},
                                 {"edits", edits},
                                 {"trace", trace},
                                 {"model_ref", candidate_file_name(i + 1)},
                                 {"pseudo_code", render_pseudocode(c.model)}});
  }
  if (include_timing)
    out["timing_ms"] = report.elapsed_ms;
  return out;
}

std::string render_report_text(const RepairReport &report)
{
  std::string out;
  if (report.diagnostic)
    out += format_diagnostic(*report.diagnostic) + "\n";
  else
    out += "Valid Model\n";
  for (std::size_t i = 0; i < report.candidates.size(); ++i)
  {
    const auto &c = report.candidates[i];
    out += "\nFix " + std::to_string(i + 1) + " (change value " + std::to_string(c.change_value) + ")\n";
    for (const auto &e : c.edits)
      out += "  " + describe_edit(e) + "\n";
  }
  return out;
}

} // namespace nnrepair
