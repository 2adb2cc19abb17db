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

#include <fstream>
#include <sstream>

#include "nnrepair/io.h"

namespace nnrepair
{

namespace
{

using json = nlohmann::json;

[[noreturn]] void schema_fail(const std::string &path, const std::string &what)
{
  throw SchemaError(path + ": " + what);
}

const json &require(const json &obj, const char *key, const std::string &path)
{
  auto it = obj.find(key);
  if (it == obj.end())
    schema_fail(path, std::string{"missing \""} + key + "\"");
  return *it;
}

std::string get_string(const json &value, const std::string &path)
{
  if (!value.is_string())
    schema_fail(path, "expected a string");
  return value.get<std::string>();
}

std::int64_t get_int(const json &value, const std::string &path)
{
  if (!value.is_number_integer())
    schema_fail(path, "expected an integer");
  return value.get<std::int64_t>();
}

IntList get_int_list(const json &value, const std::string &path)
{
  if (!value.is_array())
    schema_fail(path, "expected an array of integers");
  IntList out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(get_int(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> get_string_list(const json &value, const std::string &path)
{
  if (!value.is_array())
    schema_fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(get_string(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

IntList parse_tuple(const json &value, int length, bool pairs, const std::string &path)
{
  if (value.is_number_integer())
  {
    const auto v = value.get<std::int64_t>();
    return IntList(length > 0 ? static_cast<std::size_t>(length) : 1, v);
  }
  if (!value.is_array())
    schema_fail(path, "expected an integer or an array");

  IntList flat;
  bool nested = false;
  for (std::size_t i = 0; i < value.size(); ++i)
  {
    const auto &item = value[i];
    const auto item_path = path + "[" + std::to_string(i) + "]";
    if (pairs && item.is_array())
    {
      const auto pair = get_int_list(item, item_path);
      if (pair.size() != 2)
        schema_fail(item_path, "expected a (left, right) pair");
      flat.insert(flat.end(), pair.begin(), pair.end());
      nested = true;
    }
    else
    {
      flat.push_back(get_int(item, item_path));
    }
  }
  if (length <= 0 || static_cast<int>(flat.size()) == length)
    return flat;
  if (pairs && !nested && static_cast<int>(flat.size()) * 2 == length)
  {
    IntList symmetric;
    for (auto v : flat)
    {
      symmetric.push_back(v);
      symmetric.push_back(v);
    }
    return symmetric;
  }
  schema_fail(path, "expected " + std::to_string(pairs ? length / 2 : length) + " values");
}

AttrValue parse_attr(const LayerNode &node, const std::string &name, const json &value, const std::string &path)
{
  const auto *spec = find_attr_spec(node.kind, name);
  if (!spec)
    schema_fail(path, "unknown attribute '" + name + "' for " + std::string{kind_name(node.kind)});
  switch (spec->type)
  {
    case AttrType::Int:
      return get_int(value, path);
    case AttrType::IntTuple:
      return parse_tuple(value, tuple_length(node.kind, *spec), spec->tuple_length == kPairLength, path);
    case AttrType::Token:
      return get_string(value, path);
    case AttrType::Float:
      if (!value.is_number())
        schema_fail(path, "expected a number");
      return value.get<double>();
    case AttrType::Bool:
      if (!value.is_boolean())
        schema_fail(path, "expected a boolean");
      return value.get<bool>();
  }
  schema_fail(path, "unsupported attribute type");
}

void flatten_array(const json &value, std::size_t depth, IntList &shape, std::vector<double> &values,
                   const std::string &path)
{
  if (!value.is_array() || value.empty())
    schema_fail(path, "expected a non-empty array");
  const auto size = static_cast<std::int64_t>(value.size());
  if (depth == shape.size())
    shape.push_back(size);
  else if (shape[depth] != size)
    schema_fail(path, "ragged nesting: expected " + std::to_string(shape[depth]) + " entries");

  const bool leaf_level = !value[0].is_array();
  for (std::size_t i = 0; i < value.size(); ++i)
  {
    const auto item_path = path + "[" + std::to_string(i) + "]";
    const auto &item = value[i];
    if (leaf_level)
    {
      if (!item.is_number())
        schema_fail(item_path, "expected a number");
      if (depth + 1 != shape.size())
        schema_fail(item_path, "ragged nesting");
      values.push_back(item.get<double>());
    }
    else
    {
      flatten_array(item, depth + 1, shape, values, item_path);
    }
  }
}

NdArray parse_array(const json &value, const json *declared, const std::string &path)
{
  NdArray array;
  flatten_array(value, 0, array.shape, array.values, path);
  if (declared)
  {
    const auto shape = get_int_list(*declared, path + "_shape");
    if (shape != array.shape)
      schema_fail(path, "nesting " + format_list(array.shape) + " disagrees with declared shape " + format_list(shape));
  }
  return array;
}

json nest(const NdArray &array)
{
  const auto &shape = array.shape;
  std::size_t pos = 0;
  auto build = [&](auto &self, std::size_t depth) -> json {
    json out = json::array();
    for (std::int64_t i = 0; i < shape[depth]; ++i)
    {
      if (depth + 1 == shape.size())
        out.push_back(array.values[pos++]);
      else
        out.push_back(self(self, depth + 1));
    }
    return out;
  };
  return build(build, 0);
}

json attr_to_json(const AttrValue &value)
{
  return std::visit([](const auto &v) { return json(v); }, value);
}

} // namespace

ModelGraph model_from_json(const json &doc)
{
  if (!doc.is_object())
    schema_fail("$", "expected an object");
  ModelGraph model;
  if (auto it = doc.find("name"); it != doc.end())
    model.name = get_string(*it, "$.name");

  const auto &inputs = require(doc, "inputs", "$");
  if (!inputs.is_array())
    schema_fail("$.inputs", "expected an array");
  for (std::size_t i = 0; i < inputs.size(); ++i)
  {
    const auto path = "$.inputs[" + std::to_string(i) + "]";
    const auto &in = inputs[i];
    if (!in.is_object())
      schema_fail(path, "expected an object");
    ModelInput input;
    input.id = get_string(require(in, "id", path), path + ".id");
    const auto dims = get_int_list(require(in, "shape", path), path + ".shape");
    try
    {
      input.shape = TensorShape::batched(dims);
    }
    catch (const std::invalid_argument &e)
    {
      schema_fail(path + ".shape", e.what());
    }
    if (auto it = in.find("const"); it != in.end())
    {
      if (!it->is_number())
        schema_fail(path + ".const", "expected a number");
      input.fill = it->get<double>();
    }
    model.inputs.push_back(std::move(input));
  }

  const auto &layers = require(doc, "layers", "$");
  if (!layers.is_array())
    schema_fail("$.layers", "expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i)
  {
    const auto path = "$.layers[" + std::to_string(i) + "]";
    const auto &item = layers[i];
    if (!item.is_object())
      schema_fail(path, "expected an object");
    LayerNode node;
    node.id = get_string(require(item, "id", path), path + ".id");
    const auto kind_text = get_string(require(item, "kind", path), path + ".kind");
    const auto kind = parse_kind(kind_text);
    if (!kind)
      schema_fail(path + ".kind", "unknown layer kind '" + kind_text + "'");
    node.kind = *kind;
    if (auto it = item.find("attrs"); it != item.end())
    {
      if (!it->is_object())
        schema_fail(path + ".attrs", "expected an object");
      for (const auto &[name, value] : it->items())
        node.attrs.emplace(name, parse_attr(node, name, value, path + ".attrs." + name));
    }
    if (auto it = item.find("weights"); it != item.end() && !it->is_null())
    {
      const auto wpath = path + ".weights";
      if (!it->is_object())
        schema_fail(wpath, "expected an object");
      if (!traits(node.kind).has_weights)
        schema_fail(wpath, kind_text + " takes no weights");
      auto spec = std::make_shared<WeightSpec>();
      for (const auto &[key, _] : it->items())
        if (key != "kernel" && key != "bias" && key != "kernel_shape" && key != "bias_shape")
          schema_fail(wpath, "unknown key '" + key + "'");
      auto declared = [&](const char *key) -> const json * {
        auto d = it->find(key);
        return d == it->end() ? nullptr : &*d;
      };
      if (auto k = it->find("kernel"); k != it->end())
        spec->kernel = parse_array(*k, declared("kernel_shape"), wpath + ".kernel");
      if (auto b = it->find("bias"); b != it->end())
      {
        spec->bias = parse_array(*b, declared("bias_shape"), wpath + ".bias");
        if (spec->bias->shape.size() != 1)
          schema_fail(wpath + ".bias", "expected a flat array");
      }
      node.weights = std::move(spec);
    }
    node.inputs = get_string_list(require(item, "inputs", path), path + ".inputs");
    try
    {
      validate_node(node);
    }
    catch (const InvalidModel &e)
    {
      schema_fail(path, e.what());
    }
    model.nodes.push_back(std::move(node));
  }

  model.outputs = get_string_list(require(doc, "outputs", "$"), "$.outputs");
  try
  {
    validate_model(model);
  }
  catch (const InvalidModel &e)
  {
    schema_fail("$", e.what());
  }
  return model;
}

json model_to_json(const ModelGraph &model)
{
  json doc;
  doc["name"] = model.name;
  doc["inputs"] = json::array();
  for (const auto &in : model.inputs)
  {
    json item{{"id", in.id}, {"shape", in.shape.without_batch()}};
    if (in.fill)
      item["const"] = *in.fill;
    doc["inputs"].push_back(std::move(item));
  }
  doc["layers"] = json::array();
  for (const auto &node : model.nodes)
  {
    json item{{"id", node.id}, {"kind", std::string{kind_name(node.kind)}}, {"inputs", node.inputs}};
    json attrs = json::object();
    for (const auto &[name, value] : node.attrs)
      attrs[name] = attr_to_json(value);
    item["attrs"] = std::move(attrs);
    if (node.weights)
    {
      json weights = json::object();
      if (node.weights->kernel)
      {
        weights["kernel"] = nest(*node.weights->kernel);
        weights["kernel_shape"] = node.weights->kernel->shape;
      }
      if (node.weights->bias)
      {
        weights["bias"] = nest(*node.weights->bias);
        weights["bias_shape"] = node.weights->bias->shape;
      }
      item["weights"] = std::move(weights);
    }
    doc["layers"].push_back(std::move(item));
  }
  doc["outputs"] = model.outputs;
  return doc;
}

ModelGraph load_model(std::istream &in)
{
  json doc;
  try
  {
    doc = json::parse(in);
  }
  catch (const json::parse_error &e)
  {
    throw ParseError(std::string{"$: "} + e.what());
  }
  return model_from_json(doc);
}

ModelGraph load_model(const std::filesystem::path &path)
{
  std::ifstream in{path};
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return load_model(in);
}

std::string save_model(const ModelGraph &model) { return model_to_json(model).dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path &path, const std::string &text)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush())
      throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace nnrepair
