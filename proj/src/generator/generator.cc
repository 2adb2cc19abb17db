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

#include "nnrepair/generator.h"

#include <algorithm>
#include <set>

#include "nnrepair/semantics.h"
#include "nnrepair/weights.h"

namespace nnrepair
{

namespace
{

using K = LayerKind;
using Rng = std::mt19937_64;

constexpr int kAttempts = 24;

std::int64_t uniform(std::int64_t lo, std::int64_t hi, Rng &rng)
{
  return std::uniform_int_distribution<std::int64_t>{lo, std::max(lo, hi)}(rng);
}

bool coin(double p, Rng &rng) { return std::bernoulli_distribution{p}(rng); }

template <typename T> const T &pick(const std::vector<T> &items, Rng &rng)
{
  return items[static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(items.size()) - 1, rng))];
}

const std::vector<LayerKind> kMerges = {K::Add, K::Subtract, K::Multiply, K::Average, K::Concatenate};
const std::vector<LayerKind> kActivations = {K::ReLU, K::LeakyReLU, K::Softmax};

IntList random_dims(std::size_t count, const GenConfig &cfg, Rng &rng)
{
  IntList dims;
  for (std::size_t i = 0; i < count; ++i)
    dims.push_back(uniform(cfg.dim_min, cfg.dim_max, rng));
  return dims;
}

/// Random split of count into `axes` positive factors.
IntList factorize(std::int64_t count, std::size_t axes, Rng &rng)
{
  IntList out;
  std::int64_t rest = count;
  for (std::size_t i = 0; i + 1 < axes; ++i)
  {
    IntList divisors;
    for (std::int64_t d = 1; d <= rest; ++d)
      if (rest % d == 0)
        divisors.push_back(d);
    const auto d = pick(divisors, rng);
    out.push_back(d);
    rest /= d;
  }
  out.push_back(rest);
  return out;
}

/// Attributes for kind. With a known input shape, sizes are drawn so that
/// the layer is likely to fit.
std::map<std::string, AttrValue> sample_attrs(LayerKind kind, const std::optional<TensorShape> &in, Rng &rng)
{
  std::map<std::string, AttrValue> attrs;
  const auto &t = traits(kind);
  const auto n = static_cast<std::size_t>(t.spatial_rank);
  const bool fits = in && in->rank() == n + 2;
  auto spatial = [&](std::size_t i) { return fits ? (*in)[i + 1] : 4; };
  auto tokens = [&](std::vector<std::string> options) { return AttrValue{pick(options, rng)}; };

  switch (t.family)
  {
    case LayerFamily::Conv:
    {
      IntList kernel, strides(n, 1), dilation(n, 1);
      const int mode = static_cast<int>(uniform(0, 2, rng));
      for (std::size_t i = 0; i < n; ++i)
      {
        kernel.push_back(uniform(1, std::min<std::int64_t>(4, spatial(i)), rng));
        if (mode == 1)
          strides[i] = uniform(1, 4, rng);
        if (mode == 2)
          dilation[i] = uniform(1, 4, rng);
      }
      attrs["filters"] = uniform(1, 16, rng);
      attrs["kernel_size"] = kernel;
      if (mode == 1)
        attrs["strides"] = strides;
      if (mode == 2)
        attrs["dilation_rate"] = dilation;
      attrs["padding"] = tokens({"valid", "same"});
      attrs["activation"] = tokens({"linear", "relu"});
      return attrs;
    }
    case LayerFamily::MaxPooling:
    case LayerFamily::AveragePooling:
    {
      IntList pool;
      for (std::size_t i = 0; i < n; ++i)
        pool.push_back(uniform(1, std::min<std::int64_t>(4, spatial(i)), rng));
      attrs["pool_size"] = pool;
      if (coin(0.5, rng))
      {
        IntList strides;
        for (std::size_t i = 0; i < n; ++i)
          strides.push_back(uniform(1, 4, rng));
        attrs["strides"] = strides;
      }
      attrs["padding"] = tokens({"valid", "same"});
      return attrs;
    }
    case LayerFamily::ZeroPadding:
    {
      IntList pad;
      for (std::size_t i = 0; i < 2 * n; ++i)
        pad.push_back(uniform(0, 2, rng));
      attrs["padding"] = pad;
      return attrs;
    }
    case LayerFamily::Cropping:
    {
      IntList crop;
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto room = fits ? spatial(i) - 1 : 3;
        const auto left = uniform(0, std::min<std::int64_t>(3, room), rng);
        crop.push_back(left);
        crop.push_back(uniform(0, std::min<std::int64_t>(3, room - left), rng));
      }
      attrs["cropping"] = crop;
      return attrs;
    }
    case LayerFamily::UpSampling:
    {
      IntList size;
      for (std::size_t i = 0; i < n; ++i)
        size.push_back(uniform(1, 2, rng));
      attrs["size"] = size;
      return attrs;
    }
    case LayerFamily::None:
      break;
  }

  switch (kind)
  {
    case K::Dense:
      attrs["units"] = uniform(1, 16, rng);
      attrs["activation"] = tokens({"linear", "relu", "softmax"});
      break;
    case K::Reshape:
    {
      const auto axes = static_cast<std::size_t>(uniform(1, 3, rng));
      if (in)
        attrs["target_shape"] = factorize(product(in->without_batch()), axes, rng);
      else
      {
        IntList target;
        for (std::size_t i = 0; i < axes; ++i)
          target.push_back(uniform(1, 4, rng));
        attrs["target_shape"] = target;
      }
      break;
    }
    case K::Concatenate:
      attrs["axis"] = in && in->rank() > 1 ? uniform(1, static_cast<std::int64_t>(in->rank()) - 1, rng)
                                           : std::int64_t{-1};
      break;
    case K::LeakyReLU:
      attrs["alpha"] = static_cast<double>(uniform(1, 5, rng)) / 10.0;
      break;
    case K::Embedding:
      attrs["input_dim"] = uniform(1, 16, rng);
      attrs["output_dim"] = uniform(1, 16, rng);
      break;
    case K::SimpleRNN:
    case K::LSTM:
      attrs["units"] = uniform(1, 16, rng);
      attrs["return_sequences"] = coin(0.7, rng);
      break;
    default:
      break;
  }
  return attrs;
}

class ModelBuilder
{
public:
  ModelBuilder(const GenConfig &cfg, Rng &rng) : _cfg(cfg), _rng(rng) {}

  std::string add_input(const TensorShape &shape)
  {
    const auto id = "in" + std::to_string(_model.inputs.size());
    _model.inputs.push_back(ModelInput{id, shape, std::nullopt});
    _shapes.emplace(id, shape);
    return id;
  }

  std::string fresh_id(LayerKind kind)
  {
    return make_node_id(traits(kind).id_prefix, EditKind::InsertLayer, std::to_string(_model.nodes.size()), _model);
  }

  /// Adds node; returns its shape when the shape semantics accept it.
  std::optional<TensorShape> add(LayerNode node)
  {
    std::optional<TensorShape> out;
    std::vector<TensorShape> in;
    for (const auto &src : node.inputs)
      if (auto it = _shapes.find(src); it != _shapes.end() && it->second)
        in.push_back(*it->second);
    if (in.size() == node.inputs.size() && !check_layer(node, in))
      out = output_shape(node, in);
    _shapes.emplace(node.id, out);
    _model.nodes.push_back(std::move(node));
    return out;
  }

  ModelGraph finish(std::string name) &&
  {
    std::set<std::string> consumed;
    for (const auto &node : _model.nodes)
      consumed.insert(node.inputs.begin(), node.inputs.end());
    for (const auto &node : _model.nodes)
      if (!consumed.count(node.id))
        _model.outputs.push_back(node.id);
    _model.name = std::move(name);
    return std::move(_model);
  }

  const ModelGraph &model() const { return _model; }

private:
  const GenConfig &_cfg;
  Rng &_rng;
  ModelGraph _model;
  std::map<std::string, std::optional<TensorShape>> _shapes;
};

std::size_t input_rank(Family family, Rng &rng)
{
  switch (family)
  {
    case Family::Dense:
      return static_cast<std::size_t>(uniform(2, 4, rng));
    case Family::Recurrent:
      return 3;
    case Family::Pooling:
    case Family::Conv:
      return static_cast<std::size_t>(uniform(3, 5, rng));
    case Family::Mixed:
      break;
  }
  return static_cast<std::size_t>(uniform(2, 5, rng));
}

struct Produced
{
  std::string id;
  TensorShape shape;
};

/// A layer that passes the checks on `current`, or nothing.
std::optional<LayerNode> valid_layer(LayerKind kind, const Produced &current, std::vector<Produced> &pool,
                                     ModelBuilder &builder, const GenConfig &cfg, Rng &rng)
{
  LayerNode node;
  node.kind = kind;
  node.id = builder.fresh_id(kind);
  for (int attempt = 0; attempt < kAttempts; ++attempt)
  {
    node.attrs = sample_attrs(kind, current.shape, rng);
    std::vector<TensorShape> in{current.shape};
    node.inputs = {current.id};
    std::optional<TensorShape> new_input;

    if (traits(kind).merge)
    {
      // Partner with a matching shape: an earlier output or a new input.
      std::optional<std::size_t> axis;
      IntList want = current.shape.dims();
      if (kind == K::Concatenate)
      {
        if (current.shape.rank() < 2)
          return std::nullopt;
        axis = static_cast<std::size_t>(std::get<std::int64_t>(node.attrs.at("axis")));
      }
      std::vector<const Produced *> partners;
      for (const auto &p : pool)
      {
        if (p.id == current.id || p.shape.rank() != current.shape.rank())
          continue;
        bool ok = true;
        for (std::size_t i = 0; i < want.size(); ++i)
          ok = ok && (i == axis || p.shape[i] == want[i]);
        if (ok)
          partners.push_back(&p);
      }
      if (!partners.empty() && coin(0.6, rng))
      {
        const auto *p = pick(partners, rng);
        node.inputs.push_back(p->id);
        in.push_back(p->shape);
      }
      else
      {
        if (axis)
          want[*axis] = uniform(cfg.dim_min, cfg.dim_max, rng);
        if (std::any_of(want.begin() + 1, want.end(), [&](auto d) { return d < cfg.dim_min || d > cfg.dim_max; }))
          continue;
        new_input = TensorShape{want};
        node.inputs.push_back("");
        in.push_back(*new_input);
      }
    }

    if (traits(kind).has_weights && !traits(kind).merge)
      node.weights = random_weights(node, current.shape, rng);
    if (check_layer(node, in))
      continue;
    const auto out = output_shape(node, in);
    if (out.elements() > cfg.max_elements)
      continue;
    if (new_input)
      node.inputs.back() = builder.add_input(*new_input);
    return node;
  }
  return std::nullopt;
}

ModelGraph generate_valid(const GenConfig &cfg, Rng &rng)
{
  ModelBuilder builder{cfg, rng};
  auto kinds = family_kinds(cfg.family);
  if (cfg.graph_mode)
    kinds.insert(kinds.end(), kMerges.begin(), kMerges.end());
  if (cfg.value_executable_only)
    std::erase_if(kinds, [](K k) { return !traits(k).value_executable; });

  const auto count = uniform(cfg.layers_min, cfg.layers_max, rng);
  TensorShape shape = TensorShape::batched(random_dims(input_rank(cfg.family, rng) - 1, cfg, rng));
  std::vector<Produced> pool{{builder.add_input(shape), shape}};
  Produced current = pool.front();

  for (std::int64_t i = 0; i < count; ++i)
  {
    std::optional<LayerNode> node;
    for (int attempt = 0; attempt < kAttempts && !node; ++attempt)
      node = valid_layer(pick(kinds, rng), current, pool, builder, cfg, rng);
    if (!node)
      node = valid_layer(K::ReLU, current, pool, builder, cfg, rng);
    const auto out = builder.add(std::move(*node));
    current = Produced{builder.model().nodes.back().id, *out};
    pool.push_back(current);
  }
  return std::move(builder).finish("generated_" + std::to_string(cfg.seed));
}

ModelGraph generate_free(const GenConfig &cfg, Rng &rng)
{
  ModelBuilder builder{cfg, rng};
  auto kinds = family_kinds(cfg.family);
  if (cfg.graph_mode)
    kinds.insert(kinds.end(), kMerges.begin(), kMerges.end());
  if (cfg.value_executable_only)
    std::erase_if(kinds, [](K k) { return !traits(k).value_executable; });

  const auto count = uniform(cfg.layers_min, cfg.layers_max, rng);
  TensorShape first = TensorShape::batched(random_dims(input_rank(cfg.family, rng) - 1, cfg, rng));
  std::vector<std::pair<std::string, std::optional<TensorShape>>> pool{{builder.add_input(first), first}};
  auto current = pool.front();

  for (std::int64_t i = 0; i < count; ++i)
  {
    LayerNode node;
    node.kind = pick(kinds, rng);
    node.id = builder.fresh_id(node.kind);
    node.attrs = sample_attrs(node.kind, current.second, rng);
    node.inputs = {current.first};
    if (traits(node.kind).merge)
    {
      if (pool.size() > 1 && coin(0.5, rng))
        node.inputs.push_back(pick(pool, rng).first);
      else
      {
        const auto rank = current.second ? current.second->rank() : input_rank(cfg.family, rng);
        node.inputs.push_back(builder.add_input(TensorShape::batched(random_dims(rank - 1, cfg, rng))));
      }
    }
    else if (traits(node.kind).has_weights && current.second)
    {
      node.weights = random_weights(node, *current.second, rng);
    }
    const auto out = builder.add(std::move(node));
    current = {builder.model().nodes.back().id, out};
    pool.push_back(current);
  }
  return std::move(builder).finish("generated_" + std::to_string(cfg.seed));
}

// Injection.

struct Target
{
  std::string node;
  std::optional<Edit> edit;
};

using Injector = std::optional<Edit> (*)(const ModelGraph &, const LayerNode &, const ShapeResult &, Rng &);

std::optional<Edit> inject_weight(const ModelGraph &, const LayerNode &node, const ShapeResult &, Rng &rng)
{
  if (!node.weights || !node.weights->kernel)
    return std::nullopt;
  auto spec = std::make_shared<WeightSpec>(*node.weights);
  IntList shape = spec->kernel->shape;
  shape[0] += uniform(1, 3, rng);
  spec->kernel = random_array(shape, rng);
  return WeightRegen{node.id, spec};
}

std::optional<Edit> inject_dimension(const ModelGraph &, const LayerNode &node, const ShapeResult &shapes, Rng &rng)
{
  const auto &t = traits(node.kind);
  if (t.family == LayerFamily::None)
    return std::nullopt;
  const int target = t.spatial_rank == 3 ? 2 : t.spatial_rank + 1;
  const auto variant = family_variant(node.kind, target);
  if (!variant)
    return std::nullopt;
  LayerNode replacement;
  replacement.id = node.id;
  replacement.kind = *variant;
  for (const auto &spec : attr_specs(*variant))
  {
    const auto *value = node.attr(spec.name);
    if (!value)
      continue;
    AttrValue v = *value;
    const int len = tuple_length(*variant, spec);
    if (len > 0 && std::holds_alternative<IntList>(v))
      std::get<IntList>(v).resize(static_cast<std::size_t>(len), spec.tuple_length == kPairLength ? 0 : 1);
    replacement.attrs.emplace(std::string{spec.name}, std::move(v));
  }
  if (t.has_weights && node.weights)
  {
    // Kernel laid out for the new rank, so only the rank is wrong.
    IntList kernel = std::get<IntList>(replacement.attrs.at("kernel_size"));
    const auto in = shapes.shapes.at(node.inputs.at(0));
    kernel.push_back(in.dims().back());
    kernel.push_back(node.int_attr("filters", 1));
    auto spec = std::make_shared<WeightSpec>();
    spec->kernel = random_array(kernel, rng);
    if (node.weights->bias)
      spec->bias = node.weights->bias;
    replacement.weights = spec;
  }
  return ReplaceLayer{node.id, std::move(replacement)};
}

std::optional<Edit> inject_mismatch(const ModelGraph &model, const LayerNode &node, const ShapeResult &shapes,
                                    Rng &rng)
{
  if (!traits(node.kind).merge)
    return std::nullopt;
  const auto edge = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(node.inputs.size()) - 1, rng));
  const auto in = shapes.shapes.at(node.inputs[edge]).without_batch();
  IntList target = in;
  if (in.size() >= 2 && coin(0.5, rng))
  {
    target.pop_back();
    target.back() *= in.back();
  }
  else
  {
    target.push_back(1);
  }
  LayerNode reshape;
  reshape.kind = K::Reshape;
  reshape.id = make_node_id("Res", EditKind::InsertLayer, node.id, model);
  reshape.attrs["target_shape"] = target;
  return InsertLayer{std::move(reshape), node.id, edge};
}

std::optional<Edit> inject_argument(const ModelGraph &, const LayerNode &node, const ShapeResult &shapes, Rng &rng)
{
  const auto &t = traits(node.kind);
  auto old = [&](const char *attr) -> std::optional<AttrValue> {
    if (const auto *v = node.attr(attr))
      return *v;
    return std::nullopt;
  };
  if (t.family == LayerFamily::Conv)
  {
    const auto p = window_params(node);
    const auto n = p.window.size();
    const auto axis = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(n) - 1, rng));
    const bool strided = std::any_of(p.strides.begin(), p.strides.end(), [](auto s) { return s > 1; });
    const bool dilated = std::any_of(p.dilation.begin(), p.dilation.end(), [](auto d) { return d > 1; });
    if (strided && !dilated)
    {
      IntList dilation = p.dilation;
      dilation[axis] = uniform(2, 4, rng);
      return ArgChange{node.id, "dilation_rate", old("dilation_rate"), dilation};
    }
    if (dilated && !strided)
    {
      IntList strides = p.strides;
      strides[axis] = uniform(2, 4, rng);
      return ArgChange{node.id, "strides", old("strides"), strides};
    }
    if (!strided && !dilated)
    {
      LayerNode replacement = node;
      IntList strides = p.strides, dilation = p.dilation;
      strides[axis] = uniform(2, 4, rng);
      dilation[axis] = uniform(2, 4, rng);
      replacement.attrs["strides"] = strides;
      replacement.attrs["dilation_rate"] = dilation;
      replacement.inputs.clear();
      return ReplaceLayer{node.id, std::move(replacement)};
    }
    return std::nullopt;
  }
  if (node.kind == K::Reshape)
  {
    IntList target = node.tuple_attr("target_shape", {});
    target.back() += uniform(1, 3, rng);
    return ArgChange{node.id, "target_shape", old("target_shape"), target};
  }
  if (node.kind == K::Concatenate)
  {
    const auto rank = static_cast<std::int64_t>(shapes.shapes.at(node.inputs.at(0)).rank());
    return ArgChange{node.id, "axis", old("axis"), rank + uniform(0, 2, rng)};
  }
  return std::nullopt;
}

std::optional<Edit> inject_window(const ModelGraph &, const LayerNode &node, const ShapeResult &shapes, Rng &rng)
{
  const auto &t = traits(node.kind);
  const auto n = static_cast<std::size_t>(t.spatial_rank);
  const auto in = shapes.shapes.at(node.inputs.at(0));
  const auto axis = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(std::max<std::size_t>(n, 1)) - 1, rng));
  auto old = [&](const char *attr) -> std::optional<AttrValue> {
    if (const auto *v = node.attr(attr))
      return *v;
    return std::nullopt;
  };
  if (t.family == LayerFamily::Cropping)
  {
    IntList crop = node.tuple_attr("cropping", IntList(2 * n, 0));
    const auto dim = in[axis + 1];
    crop[2 * axis + 1] = dim - crop[2 * axis] + uniform(0, 2, rng);
    return ArgChange{node.id, "cropping", old("cropping"), crop};
  }
  if (t.family == LayerFamily::MaxPooling || t.family == LayerFamily::AveragePooling ||
      t.family == LayerFamily::Conv)
  {
    const auto p = window_params(node);
    if (p.same)
      return std::nullopt;
    IntList window = p.window;
    window[axis] = in[axis + 1] + uniform(1, 4, rng);
    const char *attr = t.family == LayerFamily::Conv ? "kernel_size" : "pool_size";
    return ArgChange{node.id, attr, old(attr), window};
  }
  return std::nullopt;
}

Injector injector_for(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::WeightShapeError:
      return inject_weight;
    case ErrorKind::DimensionError:
      return inject_dimension;
    case ErrorKind::InputShapeMismatch:
      return inject_mismatch;
    case ErrorKind::ArgumentError:
      return inject_argument;
    case ErrorKind::WindowOverflow:
      return inject_window;
  }
  return nullptr;
}

std::optional<Injection> try_inject(const ModelGraph &model, const ShapeResult &shapes, ErrorKind kind, Rng &rng,
                                    const std::set<std::string> &excluded)
{
  std::vector<std::size_t> order(model.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  const auto injector = injector_for(kind);
  for (auto i : order)
  {
    const auto &node = model.nodes[i];
    if (excluded.count(node.id))
      continue;
    auto edit = injector(model, node, shapes, rng);
    if (!edit)
      continue;
    auto broken = apply_edit(model, *edit);
    const auto result = infer_shapes(broken);
    if (result.diagnostic && result.diagnostic->kind == kind && result.diagnostic->layer_id == node.id)
      return Injection{std::move(broken), std::move(*edit)};
  }
  return std::nullopt;
}

} // namespace

std::string_view family_name(Family family)
{
  switch (family)
  {
    case Family::Dense:
      return "dense";
    case Family::Recurrent:
      return "recurrent";
    case Family::Pooling:
      return "pooling";
    case Family::Conv:
      return "conv";
    case Family::Mixed:
      return "mixed";
  }
  return "mixed";
}

std::optional<Family> parse_family(std::string_view name)
{
  for (auto f : {Family::Dense, Family::Recurrent, Family::Pooling, Family::Conv, Family::Mixed})
    if (family_name(f) == name)
      return f;
  return std::nullopt;
}

std::vector<LayerKind> family_kinds(Family family)
{
  std::vector<LayerKind> kinds;
  switch (family)
  {
    case Family::Dense:
      kinds = {K::Dense, K::Flatten, K::BatchNormalization};
      break;
    case Family::Recurrent:
      kinds = {K::SimpleRNN, K::LSTM};
      break;
    case Family::Pooling:
      kinds = {K::MaxPooling1D,     K::MaxPooling2D,     K::MaxPooling3D,
               K::AveragePooling1D, K::AveragePooling2D, K::AveragePooling3D};
      break;
    case Family::Conv:
      kinds = {K::Conv1D,           K::Conv2D,           K::Conv3D,           K::MaxPooling1D,
               K::MaxPooling2D,     K::MaxPooling3D,     K::AveragePooling1D, K::AveragePooling2D,
               K::AveragePooling3D, K::Reshape};
      break;
    case Family::Mixed:
      for (auto k : all_kinds())
        if (!traits(k).merge)
          kinds.push_back(k);
      return kinds;
  }
  kinds.insert(kinds.end(), kActivations.begin(), kActivations.end());
  return kinds;
}

ModelGraph generate_model(const GenConfig &cfg)
{
  if (cfg.dim_min < 1 || cfg.dim_max < cfg.dim_min)
    throw std::invalid_argument("dimension range must satisfy 1 <= min <= max");
  if (cfg.layers_min < 1 || cfg.layers_max < cfg.layers_min)
    throw std::invalid_argument("layer count range must satisfy 1 <= min <= max");
  if (cfg.inject_bugs < 0)
    throw std::invalid_argument("inject_bugs must be >= 0");

  Rng rng{cfg.seed};
  if (!cfg.valid && cfg.inject_bugs == 0)
    return generate_free(cfg, rng);

  static const std::vector<ErrorKind> kinds = {ErrorKind::DimensionError, ErrorKind::InputShapeMismatch,
                                               ErrorKind::ArgumentError, ErrorKind::WeightShapeError,
                                               ErrorKind::WindowOverflow};
  // Every bug is verified against the valid model on its own, then all of
  // them are applied together. Models with no injectable layer are redrawn.
  ModelGraph model;
  std::vector<Edit> bugs;
  for (int draw = 0; draw < kAttempts && bugs.empty(); ++draw)
  {
    model = generate_valid(cfg, rng);
    if (cfg.inject_bugs == 0)
      return model;
    const auto shapes = infer_shapes(model);
    std::set<std::string> targeted;
    for (int b = 0; b < cfg.inject_bugs; ++b)
    {
      auto order = kinds;
      std::shuffle(order.begin(), order.end(), rng);
      for (auto kind : order)
      {
        auto injection = try_inject(model, shapes, kind, rng, targeted);
        if (!injection)
          continue;
        const auto &edit = injection->edit;
        targeted.insert(edit_subject(edit));
        if (const auto *ins = std::get_if<InsertLayer>(&edit))
          targeted.insert(ins->before);
        bugs.push_back(edit);
        break;
      }
    }
  }
  ModelGraph broken = model;
  for (const auto &edit : bugs)
  {
    try
    {
      broken = apply_edit(broken, edit);
    }
    catch (const InvalidModel &)
    {
    }
  }
  return broken;
}

Injection inject_bug(std::uint64_t seed, const ModelGraph &model, ErrorKind kind)
{
  const auto shapes = infer_shapes(model);
  if (!shapes.ok())
    throw std::invalid_argument("inject_bug needs a model that passes the shape checks");
  Rng rng{seed};
  auto injection = try_inject(model, shapes, kind, rng, {});
  if (!injection)
    throw NotInjectable(std::string{"no layer admits "} + std::string{kind_text(kind)});
  return std::move(*injection);
}

std::int64_t inverse_change_value(const Edit &injection)
{
  switch (edit_kind(injection))
  {
    case EditKind::ArgChange:
    case EditKind::WeightRegen:
      return 1;
    case EditKind::ReplaceLayer:
      return 5;
    case EditKind::InsertLayer:
    case EditKind::InsertConstInput:
      // Removing a layer is not an edit; the cheapest undo is a layer.
      return 10;
  }
  return 0;
}

} // namespace nnrepair
