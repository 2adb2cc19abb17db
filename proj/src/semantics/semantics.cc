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

#include "nnrepair/semantics.h"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>

namespace nnrepair
{

namespace
{

using K = LayerKind;

Diagnostic make_diagnostic(ErrorKind kind, std::int64_t distance, std::vector<Fact> observed,
                           std::vector<Fact> expected)
{
  Diagnostic d;
  d.kind = kind;
  d.badness = compute_badness(kind, distance);
  d.observed = std::move(observed);
  d.expected = std::move(expected);
  return d;
}

/// Sum of per-axis differences over the shared prefix plus 10 per rank step.
std::int64_t shape_distance(const IntList &a, const IntList &b)
{
  std::int64_t d = 0;
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i)
    d += std::llabs(a[i] - b[i]);
  d += 10 * static_cast<std::int64_t>(a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
  return d;
}

bool is_conv(K kind) { return traits(kind).family == LayerFamily::Conv; }
bool is_pool(K kind)
{
  auto f = traits(kind).family;
  return f == LayerFamily::MaxPooling || f == LayerFamily::AveragePooling;
}

IntList ones(std::size_t n) { return IntList(n, 1); }

std::int64_t count_above_one(const IntList &v)
{
  return std::count_if(v.begin(), v.end(), [](auto x) { return x > 1; });
}

/// Concatenate axis in [1, rank-1] or nullopt if out of range.
std::optional<std::size_t> concat_axis(const LayerNode &node, std::size_t rank)
{
  std::int64_t axis = node.int_attr("axis", -1);
  if (axis < 0)
    axis += static_cast<std::int64_t>(rank);
  if (axis < 1 || axis >= static_cast<std::int64_t>(rank))
    return std::nullopt;
  return static_cast<std::size_t>(axis);
}

} // namespace

std::int64_t window_output(std::int64_t in, std::int64_t window, std::int64_t stride, bool same_padding)
{
  if (same_padding)
    return (in + stride - 1) / stride;
  return (in - window) / stride + 1;
}

WindowParams window_params(const LayerNode &node)
{
  const std::size_t n = static_cast<std::size_t>(traits(node.kind).spatial_rank);
  WindowParams p;
  if (is_conv(node.kind))
  {
    p.window = node.tuple_attr("kernel_size", ones(n));
    p.strides = node.tuple_attr("strides", ones(n));
    p.dilation = node.tuple_attr("dilation_rate", ones(n));
  }
  else
  {
    p.window = node.tuple_attr("pool_size", IntList(n, 2));
    p.strides = node.tuple_attr("strides", p.window);
    p.dilation = ones(n);
  }
  p.same = node.token_attr("padding", "valid") == "same";
  return p;
}

std::optional<AttrValue> effective_attr(const LayerNode &node, std::string_view attr)
{
  const auto family = traits(node.kind).family;
  if (family == LayerFamily::Conv || family == LayerFamily::MaxPooling || family == LayerFamily::AveragePooling)
  {
    const auto p = window_params(node);
    if (attr == "kernel_size" || attr == "pool_size")
      return p.window;
    if (attr == "strides")
      return p.strides;
    if (attr == "dilation_rate")
      return p.dilation;
    if (attr == "padding")
      return std::string{p.same ? "same" : "valid"};
  }
  if (const auto *v = node.attr(attr))
    return *v;
  return std::nullopt;
}

std::optional<RankRequirement> required_rank(LayerKind kind)
{
  const auto &t = traits(kind);
  if (t.family != LayerFamily::None)
    return RankRequirement{static_cast<std::size_t>(t.spatial_rank) + 2, true};
  switch (kind)
  {
    case K::Embedding:
      return RankRequirement{2, true};
    case K::SimpleRNN:
    case K::LSTM:
      return RankRequirement{3, true};
    case K::Dense:
    case K::BatchNormalization:
      return RankRequirement{2, false};
    default:
      return std::nullopt;
  }
}

std::optional<WeightShapes> expected_weights(const LayerNode &node, const TensorShape &in)
{
  const std::int64_t last = in.dims().back();
  switch (node.kind)
  {
    case K::Dense:
    {
      const auto units = node.int_attr("units", 1);
      return WeightShapes{{last, units}, IntList{units}};
    }
    case K::Conv1D:
    case K::Conv2D:
    case K::Conv3D:
    {
      const auto filters = node.int_attr("filters", 1);
      IntList kernel = window_params(node).window;
      kernel.push_back(last);
      kernel.push_back(filters);
      return WeightShapes{kernel, IntList{filters}};
    }
    case K::Embedding:
      return WeightShapes{{node.int_attr("input_dim", 1), node.int_attr("output_dim", 1)}, std::nullopt};
    case K::BatchNormalization:
      return WeightShapes{{4, last}, std::nullopt};
    case K::SimpleRNN:
    {
      const auto units = node.int_attr("units", 1);
      return WeightShapes{{last + units, units}, IntList{units}};
    }
    case K::LSTM:
    {
      const auto units = node.int_attr("units", 1);
      return WeightShapes{{last + units, 4 * units}, IntList{4 * units}};
    }
    default:
      return std::nullopt;
  }
}

std::optional<Diagnostic> check_min_dimensions(const TensorShape &shape, std::size_t min_rank)
{
  if (shape.rank() >= min_rank)
    return std::nullopt;
  return make_diagnostic(ErrorKind::DimensionError, static_cast<std::int64_t>(min_rank - shape.rank()),
                         {{"Input Shape", {shape.dims()}, {}}},
                         {{"Min Dimensions", {}, static_cast<std::int64_t>(min_rank)}});
}

std::optional<Diagnostic> check_exact_dimensions(const TensorShape &shape, std::size_t rank)
{
  if (shape.rank() == rank)
    return std::nullopt;
  const auto distance = std::llabs(static_cast<std::int64_t>(shape.rank()) - static_cast<std::int64_t>(rank));
  return make_diagnostic(ErrorKind::DimensionError, distance, {{"Input Shape", {shape.dims()}, {}}},
                         {{"Dimensions", {}, static_cast<std::int64_t>(rank)}});
}

std::optional<Diagnostic> check_weight_consistency(const LayerNode &node, const TensorShape &in)
{
  if (!node.weights)
    return std::nullopt;
  const auto expected = expected_weights(node, in);
  if (!expected)
    return std::nullopt;

  const auto &w = *node.weights;
  std::int64_t distance = 0;
  distance += w.kernel ? shape_distance(w.kernel->shape, expected->kernel)
                       : 10 * static_cast<std::int64_t>(expected->kernel.size());
  // A missing bias means the layer runs without one.
  if (w.bias)
    distance += expected->bias ? shape_distance(w.bias->shape, *expected->bias) : 10;
  if (distance == 0)
    return std::nullopt;

  std::vector<Fact> observed;
  observed.push_back({"Kernel Shape", {w.kernel ? w.kernel->shape : IntList{}}, {}});
  if (w.bias)
    observed.push_back({"Bias Shape", {w.bias->shape}, {}});
  std::vector<Fact> wanted;
  wanted.push_back({"Kernel Shape", {expected->kernel}, {}});
  if (w.bias && expected->bias)
    wanted.push_back({"Bias Shape", {*expected->bias}, {}});
  return make_diagnostic(ErrorKind::WeightShapeError, distance, std::move(observed), std::move(wanted));
}

std::optional<Diagnostic> check_multi_input_shapes(const LayerNode &node, std::span<const TensorShape> in)
{
  if (in.size() < 2)
    return std::nullopt;
  const auto &ref = in[0];
  bool same_rank = true;
  for (const auto &s : in)
    same_rank = same_rank && s.rank() == ref.rank();

  std::optional<std::size_t> skip_axis;
  if (node.kind == K::Concatenate && same_rank)
    skip_axis = concat_axis(node, ref.rank());

  std::int64_t distance = 0;
  std::optional<std::size_t> first_bad;
  for (std::size_t j = 1; j < in.size(); ++j)
  {
    IntList a = ref.dims();
    IntList b = in[j].dims();
    if (skip_axis)
    {
      a.erase(a.begin() + static_cast<std::ptrdiff_t>(*skip_axis));
      b.erase(b.begin() + static_cast<std::ptrdiff_t>(*skip_axis));
    }
    const auto d = shape_distance(a, b);
    if (d > 0 && !first_bad)
      first_bad = j;
    distance += d;
  }
  if (distance == 0)
    return std::nullopt;

  std::vector<Fact> expected;
  if (skip_axis)
    expected.push_back({"Equal Shapes Except Axis", {}, static_cast<std::int64_t>(*skip_axis)});
  else
    expected.push_back({"Equal Shapes", {}, {}});
  return make_diagnostic(ErrorKind::InputShapeMismatch, distance,
                         {{"Input Shapes", {ref.dims(), in[*first_bad].dims()}, {}}}, std::move(expected));
}

std::optional<Diagnostic> check_arg_consistency(const LayerNode &node, std::span<const TensorShape> in)
{
  if (is_conv(node.kind))
  {
    const auto p = window_params(node);
    const auto pairs = count_above_one(p.strides) * count_above_one(p.dilation);
    if (pairs == 0)
      return std::nullopt;
    return make_diagnostic(ErrorKind::ArgumentError, pairs, {{"Strides", {p.strides}, {}}, {"Dilation Rate", {p.dilation}, {}}},
                           {{"Unit Strides Or Unit Dilation Rate", {}, {}}});
  }
  if (node.kind == K::Reshape && !in.empty())
  {
    const auto target = node.tuple_attr("target_shape", {});
    const auto want = product(in[0].without_batch());
    if (product(target) == want)
      return std::nullopt;
    return make_diagnostic(ErrorKind::ArgumentError, 1,
                           {{"Target Shape", {target}, {}}, {"Input Shape", {in[0].dims()}, {}}},
                           {{"Element Count", {}, want}});
  }
  if (node.kind == K::Concatenate && !in.empty())
  {
    const auto rank = in[0].rank();
    if (rank < 2 || concat_axis(node, rank))
      return std::nullopt;
    return make_diagnostic(ErrorKind::ArgumentError, 1, {{"Axis", {}, node.int_attr("axis", -1)}},
                           {{"Axis Range", {{1, static_cast<std::int64_t>(rank) - 1}}, {}}});
  }
  return std::nullopt;
}

std::optional<Diagnostic> check_window_fits(const LayerNode &node, const TensorShape &in)
{
  const auto &t = traits(node.kind);
  const std::size_t n = static_cast<std::size_t>(t.spatial_rank);
  if (n == 0 || in.rank() != n + 2)
    return std::nullopt;

  if (t.family == LayerFamily::Cropping)
  {
    const auto crop = node.tuple_attr("cropping", IntList(2 * n, 0));
    std::int64_t overflow = 0;
    IntList max_total;
    for (std::size_t i = 0; i < n; ++i)
    {
      const auto dim = in[i + 1];
      max_total.push_back(dim - 1);
      overflow += std::max<std::int64_t>(0, crop[2 * i] + crop[2 * i + 1] - (dim - 1));
    }
    if (overflow == 0)
      return std::nullopt;
    return make_diagnostic(ErrorKind::WindowOverflow, overflow, {{"Cropping", {crop}, {}}},
                           {{"Max Total", {max_total}, {}}});
  }

  if (!is_conv(node.kind) && !is_pool(node.kind))
    return std::nullopt;
  const auto p = window_params(node);
  if (p.same)
    return std::nullopt;

  std::int64_t overflow = 0;
  IntList max_window;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto dim = in[i + 1];
    const auto effective = p.dilation[i] * (p.window[i] - 1) + 1;
    overflow += std::max<std::int64_t>(0, effective - dim);
    max_window.push_back((dim - 1) / p.dilation[i] + 1);
  }
  if (overflow == 0)
    return std::nullopt;
  const char *label = is_conv(node.kind) ? "Kernel Size" : "Pool Size";
  return make_diagnostic(ErrorKind::WindowOverflow, overflow, {{label, {p.window}, {}}},
                         {{"Max", {max_window}, {}}});
}

std::optional<Diagnostic> check_layer(const LayerNode &node, std::span<const TensorShape> in)
{
  const auto &t = traits(node.kind);
  if (t.merge)
  {
    bool same_rank = std::all_of(in.begin(), in.end(), [&](const auto &s) { return s.rank() == in[0].rank(); });
    if (!same_rank)
      return check_multi_input_shapes(node, in);
    if (auto d = check_arg_consistency(node, in))
      return d;
    return check_multi_input_shapes(node, in);
  }

  const auto &shape = in[0];
  if (auto req = required_rank(node.kind))
  {
    auto d = req->exact ? check_exact_dimensions(shape, req->rank) : check_min_dimensions(shape, req->rank);
    if (d)
      return d;
  }
  if (auto d = check_arg_consistency(node, in))
    return d;
  if (auto d = check_window_fits(node, shape))
    return d;
  return check_weight_consistency(node, shape);
}

TensorShape output_shape(const LayerNode &node, std::span<const TensorShape> in)
{
  const auto &t = traits(node.kind);
  IntList dims = in[0].dims();
  const std::size_t n = static_cast<std::size_t>(t.spatial_rank);

  switch (t.family)
  {
    case LayerFamily::Conv:
    case LayerFamily::MaxPooling:
    case LayerFamily::AveragePooling:
    {
      const auto p = window_params(node);
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto effective = p.dilation[i] * (p.window[i] - 1) + 1;
        dims[i + 1] = window_output(dims[i + 1], effective, p.strides[i], p.same);
      }
      if (t.family == LayerFamily::Conv)
        dims.back() = node.int_attr("filters", 1);
      return TensorShape{dims};
    }
    case LayerFamily::ZeroPadding:
    {
      const auto pad = node.tuple_attr("padding", IntList(2 * n, 1));
      for (std::size_t i = 0; i < n; ++i)
        dims[i + 1] += pad[2 * i] + pad[2 * i + 1];
      return TensorShape{dims};
    }
    case LayerFamily::Cropping:
    {
      const auto crop = node.tuple_attr("cropping", IntList(2 * n, 0));
      for (std::size_t i = 0; i < n; ++i)
        dims[i + 1] -= crop[2 * i] + crop[2 * i + 1];
      return TensorShape{dims};
    }
    case LayerFamily::UpSampling:
    {
      const auto size = node.tuple_attr("size", IntList(n, 2));
      for (std::size_t i = 0; i < n; ++i)
        dims[i + 1] *= size[i];
      return TensorShape{dims};
    }
    case LayerFamily::None:
      break;
  }

  switch (node.kind)
  {
    case K::Dense:
      dims.back() = node.int_attr("units", 1);
      return TensorShape{dims};
    case K::Flatten:
      return TensorShape{{dims[0], product(in[0].without_batch())}};
    case K::Reshape:
    {
      IntList out{dims[0]};
      const auto target = node.tuple_attr("target_shape", {});
      out.insert(out.end(), target.begin(), target.end());
      return TensorShape{out};
    }
    case K::Concatenate:
    {
      const auto axis = concat_axis(node, dims.size()).value_or(dims.size() - 1);
      for (std::size_t j = 1; j < in.size(); ++j)
        dims[axis] += in[j][axis];
      return TensorShape{dims};
    }
    case K::Embedding:
      dims.push_back(node.int_attr("output_dim", 1));
      return TensorShape{dims};
    case K::SimpleRNN:
    case K::LSTM:
    {
      const auto units = node.int_attr("units", 1);
      if (node.bool_attr("return_sequences", false))
        return TensorShape{{dims[0], dims[1], units}};
      return TensorShape{{dims[0], units}};
    }
    default:
      // Activations, BatchNormalization and element-wise merges keep the
      // shape of their first input.
      return in[0];
  }
}

ShapeResult infer_shapes(const ModelGraph &model)
{
  ShapeResult result;
  result.order = topo_order(model);
  for (const auto &input : model.inputs)
    result.shapes.emplace(input.id, input.shape);

  std::unordered_map<std::string_view, const LayerNode *> by_id;
  for (const auto &node : model.nodes)
    by_id.emplace(node.id, &node);

  std::vector<TensorShape> in;
  for (std::size_t location = 0; location < result.order.size(); ++location)
  {
    const auto &node = *by_id.at(result.order[location]);
    in.clear();
    for (const auto &src : node.inputs)
      in.push_back(result.shapes.at(src));
    if (auto d = check_layer(node, in))
    {
      d->layer_id = node.id;
      d->location = location;
      result.diagnostic = std::move(d);
      return result;
    }
    result.shapes.emplace(node.id, output_shape(node, in));
  }
  return result;
}

} // namespace nnrepair
