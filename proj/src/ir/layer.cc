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

#include "nnrepair/layer.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>

namespace nnrepair
{

namespace
{

using K = LayerKind;
using F = LayerFamily;

// clang-format off
constexpr std::array<KindTraits, 33> kTraits{{
  // kind                  name                  prefix  family           N  merge  weights exec
  {K::Dense,              "Dense",              "Den", F::None,           0, false, true,  true},
  {K::Conv1D,             "Conv1D",             "Con", F::Conv,           1, false, true,  true},
  {K::Conv2D,             "Conv2D",             "Con", F::Conv,           2, false, true,  false},
  {K::Conv3D,             "Conv3D",             "Con", F::Conv,           3, false, true,  false},
  {K::MaxPooling1D,       "MaxPooling1D",       "Max", F::MaxPooling,     1, false, false, true},
  {K::MaxPooling2D,       "MaxPooling2D",       "Max", F::MaxPooling,     2, false, false, true},
  {K::MaxPooling3D,       "MaxPooling3D",       "Max", F::MaxPooling,     3, false, false, true},
  {K::AveragePooling1D,   "AveragePooling1D",   "Ave", F::AveragePooling, 1, false, false, true},
  {K::AveragePooling2D,   "AveragePooling2D",   "Ave", F::AveragePooling, 2, false, false, true},
  {K::AveragePooling3D,   "AveragePooling3D",   "Ave", F::AveragePooling, 3, false, false, true},
  {K::Flatten,            "Flatten",            "Fla", F::None,           0, false, false, true},
  {K::Reshape,            "Reshape",            "Res", F::None,           0, false, false, true},
  {K::ZeroPadding1D,      "ZeroPadding1D",      "Zer", F::ZeroPadding,    1, false, false, true},
  {K::ZeroPadding2D,      "ZeroPadding2D",      "Zer", F::ZeroPadding,    2, false, false, true},
  {K::ZeroPadding3D,      "ZeroPadding3D",      "Zer", F::ZeroPadding,    3, false, false, true},
  {K::Cropping1D,         "Cropping1D",         "Cro", F::Cropping,       1, false, false, true},
  {K::Cropping2D,         "Cropping2D",         "Cro", F::Cropping,       2, false, false, true},
  {K::Cropping3D,         "Cropping3D",         "Cro", F::Cropping,       3, false, false, true},
  {K::UpSampling1D,       "UpSampling1D",       "UpS", F::UpSampling,     1, false, false, true},
  {K::UpSampling2D,       "UpSampling2D",       "UpS", F::UpSampling,     2, false, false, true},
  {K::UpSampling3D,       "UpSampling3D",       "UpS", F::UpSampling,     3, false, false, true},
  {K::Add,                "Add",                "Add", F::None,           0, true,  false, true},
  {K::Subtract,           "Subtract",           "Sub", F::None,           0, true,  false, true},
  {K::Multiply,           "Multiply",           "Mul", F::None,           0, true,  false, true},
  {K::Average,            "Average",            "Avg", F::None,           0, true,  false, true},
  {K::Concatenate,        "Concatenate",        "Cat", F::None,           0, true,  false, true},
  {K::ReLU,               "ReLU",               "ReL", F::None,           0, false, false, true},
  {K::LeakyReLU,          "LeakyReLU",          "Lea", F::None,           0, false, false, true},
  {K::Softmax,            "Softmax",            "Sof", F::None,           0, false, false, true},
  {K::Embedding,          "Embedding",          "Emb", F::None,           0, false, true,  false},
  {K::BatchNormalization, "BatchNormalization", "Bat", F::None,           0, false, true,  false},
  {K::SimpleRNN,          "SimpleRNN",          "Sim", F::None,           0, false, true,  false},
  {K::LSTM,               "LSTM",               "LST", F::None,           0, false, true,  false},
}};
// clang-format on

constexpr auto kAllKinds = [] {
  std::array<LayerKind, kTraits.size()> kinds{};
  for (std::size_t i = 0; i < kTraits.size(); ++i)
    kinds[i] = kTraits[i].kind;
  return kinds;
}();

constexpr std::int64_t kNoMin = std::numeric_limits<std::int64_t>::min();

const std::vector<AttrSpec> kDenseAttrs{
  {"units", AttrType::Int, true},
  {"activation", AttrType::Token, false, kAnyLength, 1, {"linear", "relu", "softmax"}},
};
const std::vector<AttrSpec> kConvAttrs{
  {"filters", AttrType::Int, true},
  {"kernel_size", AttrType::IntTuple, true, kSpatialLength},
  {"strides", AttrType::IntTuple, false, kSpatialLength},
  {"dilation_rate", AttrType::IntTuple, false, kSpatialLength},
  {"padding", AttrType::Token, false, kAnyLength, 1, {"valid", "same"}},
  {"activation", AttrType::Token, false, kAnyLength, 1, {"linear", "relu", "softmax"}},
};
const std::vector<AttrSpec> kPoolAttrs{
  {"pool_size", AttrType::IntTuple, false, kSpatialLength},
  {"strides", AttrType::IntTuple, false, kSpatialLength},
  {"padding", AttrType::Token, false, kAnyLength, 1, {"valid", "same"}},
};
const std::vector<AttrSpec> kNoAttrs{};
const std::vector<AttrSpec> kReshapeAttrs{
  {"target_shape", AttrType::IntTuple, true, kAnyLength},
};
const std::vector<AttrSpec> kZeroPadAttrs{
  {"padding", AttrType::IntTuple, false, kPairLength, 0},
};
const std::vector<AttrSpec> kCropAttrs{
  {"cropping", AttrType::IntTuple, false, kPairLength, 0},
};
const std::vector<AttrSpec> kUpSampleAttrs{
  {"size", AttrType::IntTuple, false, kSpatialLength},
};
const std::vector<AttrSpec> kConcatAttrs{
  {"axis", AttrType::Int, false, kAnyLength, kNoMin},
};
const std::vector<AttrSpec> kLeakyAttrs{
  {"alpha", AttrType::Float, false},
};
const std::vector<AttrSpec> kEmbeddingAttrs{
  {"input_dim", AttrType::Int, true},
  {"output_dim", AttrType::Int, true},
};
const std::vector<AttrSpec> kBatchNormAttrs{
  {"epsilon", AttrType::Float, false},
};
const std::vector<AttrSpec> kRecurrentAttrs{
  {"units", AttrType::Int, true},
  {"return_sequences", AttrType::Bool, false},
};

} // namespace

std::string format_attr(const AttrValue &value)
{
  struct Visitor
  {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const IntList &v) const
    {
      std::string out = "(";
      for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + std::to_string(v[i]);
      return out + (v.size() == 1 ? ",)" : ")");
    }
    std::string operator()(const std::string &v) const { return "'" + v + "'"; }
    std::string operator()(double v) const
    {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%g", v);
      return buf;
    }
    std::string operator()(bool v) const { return v ? "True" : "False"; }
  };
  return std::visit(Visitor{}, value);
}

const KindTraits &traits(LayerKind kind) { return kTraits[static_cast<std::size_t>(kind)]; }

std::string_view kind_name(LayerKind kind) { return traits(kind).name; }

std::optional<LayerKind> parse_kind(std::string_view name)
{
  for (const auto &t : kTraits)
    if (t.name == name)
      return t.kind;
  return std::nullopt;
}

std::span<const LayerKind> all_kinds() { return kAllKinds; }

std::optional<LayerKind> family_variant(LayerKind kind, int spatial_rank)
{
  const auto &self = traits(kind);
  if (self.family == LayerFamily::None)
    return std::nullopt;
  for (const auto &t : kTraits)
    if (t.family == self.family && t.spatial_rank == spatial_rank)
      return t.kind;
  return std::nullopt;
}

std::span<const AttrSpec> attr_specs(LayerKind kind)
{
  switch (traits(kind).family)
  {
    case LayerFamily::Conv:
      return kConvAttrs;
    case LayerFamily::MaxPooling:
    case LayerFamily::AveragePooling:
      return kPoolAttrs;
    case LayerFamily::ZeroPadding:
      return kZeroPadAttrs;
    case LayerFamily::Cropping:
      return kCropAttrs;
    case LayerFamily::UpSampling:
      return kUpSampleAttrs;
    case LayerFamily::None:
      break;
  }
  switch (kind)
  {
    case K::Dense:
      return kDenseAttrs;
    case K::Reshape:
      return kReshapeAttrs;
    case K::Concatenate:
      return kConcatAttrs;
    case K::LeakyReLU:
      return kLeakyAttrs;
    case K::Embedding:
      return kEmbeddingAttrs;
    case K::BatchNormalization:
      return kBatchNormAttrs;
    case K::SimpleRNN:
    case K::LSTM:
      return kRecurrentAttrs;
    default:
      return kNoAttrs;
  }
}

const AttrSpec *find_attr_spec(LayerKind kind, std::string_view name)
{
  for (const auto &spec : attr_specs(kind))
    if (spec.name == name)
      return &spec;
  return nullptr;
}

int tuple_length(LayerKind kind, const AttrSpec &spec)
{
  const int n = traits(kind).spatial_rank;
  if (spec.tuple_length == kSpatialLength)
    return n;
  if (spec.tuple_length == kPairLength)
    return 2 * n;
  return spec.tuple_length;
}

const AttrValue *LayerNode::attr(std::string_view name) const
{
  auto it = attrs.find(std::string{name});
  return it == attrs.end() ? nullptr : &it->second;
}

std::int64_t LayerNode::int_attr(std::string_view name, std::int64_t fallback) const
{
  const auto *v = attr(name);
  if (const auto *i = v ? std::get_if<std::int64_t>(v) : nullptr)
    return *i;
  return fallback;
}

IntList LayerNode::tuple_attr(std::string_view name, const IntList &fallback) const
{
  const auto *v = attr(name);
  if (const auto *t = v ? std::get_if<IntList>(v) : nullptr)
    return *t;
  return fallback;
}

std::string LayerNode::token_attr(std::string_view name, std::string_view fallback) const
{
  const auto *v = attr(name);
  if (const auto *s = v ? std::get_if<std::string>(v) : nullptr)
    return *s;
  return std::string{fallback};
}

double LayerNode::float_attr(std::string_view name, double fallback) const
{
  const auto *v = attr(name);
  if (const auto *d = v ? std::get_if<double>(v) : nullptr)
    return *d;
  return fallback;
}

bool LayerNode::bool_attr(std::string_view name, bool fallback) const
{
  const auto *v = attr(name);
  if (const auto *b = v ? std::get_if<bool>(v) : nullptr)
    return *b;
  return fallback;
}

bool same_weights(const std::shared_ptr<const WeightSpec> &a, const std::shared_ptr<const WeightSpec> &b)
{
  if (!a || !b)
    return !a && !b;
  return a == b || *a == *b;
}

namespace
{

void check_array(const std::string &where, const std::optional<NdArray> &array)
{
  if (!array)
    return;
  for (auto d : array->shape)
    if (d < 1)
      throw InvalidModel(where + ": weight dimensions must be >= 1");
  if (static_cast<std::int64_t>(array->values.size()) != product(array->shape))
    throw InvalidModel(where + ": " + std::to_string(array->values.size()) + " values for shape " +
                       format_list(array->shape));
}

} // namespace

void validate_node(const LayerNode &node)
{
  const auto &t = traits(node.kind);
  const std::string where = "layer '" + node.id + "' (" + std::string{t.name} + ")";
  if (node.id.empty())
    throw InvalidModel("layer with empty id");

  const std::size_t n_in = node.inputs.size();
  if (node.kind == K::Subtract && n_in != 2)
    throw InvalidModel(where + ": Subtract takes exactly 2 inputs, got " + std::to_string(n_in));
  if (t.merge && n_in < 2)
    throw InvalidModel(where + ": merge layer needs at least 2 inputs, got " + std::to_string(n_in));
  if (!t.merge && n_in != 1)
    throw InvalidModel(where + ": expects exactly 1 input, got " + std::to_string(n_in));

  for (const auto &[name, value] : node.attrs)
  {
    const auto *spec = find_attr_spec(node.kind, name);
    if (!spec)
      throw InvalidModel(where + ": unknown attribute '" + name + "'");
    const std::string attr_where = where + " attribute '" + name + "'";
    switch (spec->type)
    {
      case AttrType::Int:
      {
        const auto *v = std::get_if<std::int64_t>(&value);
        if (!v)
          throw InvalidModel(attr_where + ": expected an integer");
        if (*v < spec->min_value)
          throw InvalidModel(attr_where + ": must be >= " + std::to_string(spec->min_value));
        break;
      }
      case AttrType::IntTuple:
      {
        const auto *v = std::get_if<IntList>(&value);
        if (!v)
          throw InvalidModel(attr_where + ": expected an integer tuple");
        const int len = tuple_length(node.kind, *spec);
        if (len != kAnyLength && static_cast<int>(v->size()) != len)
          throw InvalidModel(attr_where + ": expected " + std::to_string(len) + " values, got " +
                             std::to_string(v->size()));
        if (v->empty())
          throw InvalidModel(attr_where + ": empty tuple");
        for (auto x : *v)
          if (x < spec->min_value)
            throw InvalidModel(attr_where + ": values must be >= " + std::to_string(spec->min_value));
        break;
      }
      case AttrType::Token:
      {
        const auto *v = std::get_if<std::string>(&value);
        if (!v)
          throw InvalidModel(attr_where + ": expected a string token");
        if (!spec->tokens.empty() &&
            std::find(spec->tokens.begin(), spec->tokens.end(), std::string_view{*v}) == spec->tokens.end())
          throw InvalidModel(attr_where + ": unsupported value '" + *v + "'");
        break;
      }
      case AttrType::Float:
        if (!std::holds_alternative<double>(value))
          throw InvalidModel(attr_where + ": expected a number");
        break;
      case AttrType::Bool:
        if (!std::holds_alternative<bool>(value))
          throw InvalidModel(attr_where + ": expected a boolean");
        break;
    }
  }
  for (const auto &spec : attr_specs(node.kind))
    if (spec.required && !node.attrs.count(std::string{spec.name}))
      throw InvalidModel(where + ": missing required attribute '" + std::string{spec.name} + "'");

  if (node.weights)
  {
    if (!t.has_weights)
      throw InvalidModel(where + ": layer kind takes no weights");
    check_array(where + " kernel", node.weights->kernel);
    check_array(where + " bias", node.weights->bias);
  }
}

} // namespace nnrepair
