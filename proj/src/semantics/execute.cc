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

#include "nnrepair/execute.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace nnrepair
{

Tensor::Tensor(TensorShape shape_, std::vector<double> values_) : shape(std::move(shape_)), values(std::move(values_))
{
  if (static_cast<std::int64_t>(values.size()) != shape.elements())
    throw std::invalid_argument("tensor of shape " + shape.to_string() + " needs " + std::to_string(shape.elements()) +
                                " values, got " + std::to_string(values.size()));
}

Tensor Tensor::filled(const TensorShape &shape, double value)
{
  return Tensor{shape, std::vector<double>(static_cast<std::size_t>(shape.elements()), value)};
}

namespace
{

using K = LayerKind;

IntList row_strides(const IntList &dims)
{
  IntList strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;)
    strides[i - 1] = strides[i] * dims[i];
  return strides;
}

std::int64_t flat_index(const IntList &idx, const IntList &strides)
{
  std::int64_t flat = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    flat += idx[i] * strides[i];
  return flat;
}

/// Calls f(index) for every multi-index of dims in row-major order.
template <typename F> void for_each_index(const IntList &dims, F &&f)
{
  if (product(dims) == 0)
    return;
  IntList idx(dims.size(), 0);
  while (true)
  {
    f(idx);
    std::size_t axis = dims.size();
    while (axis-- > 0)
    {
      if (++idx[axis] < dims[axis])
        break;
      idx[axis] = 0;
    }
    if (axis == static_cast<std::size_t>(-1))
      return;
  }
}

void softmax_last_axis(Tensor &t)
{
  const auto width = static_cast<std::size_t>(t.shape.dims().back());
  for (std::size_t row = 0; row < t.values.size(); row += width)
  {
    auto begin = t.values.begin() + static_cast<std::ptrdiff_t>(row);
    auto end = begin + static_cast<std::ptrdiff_t>(width);
    const double peak = *std::max_element(begin, end);
    double sum = 0.0;
    for (auto it = begin; it != end; ++it)
      sum += (*it = std::exp(*it - peak));
    for (auto it = begin; it != end; ++it)
      *it /= sum;
  }
}

void apply_activation(Tensor &t, const std::string &activation)
{
  if (activation == "relu")
    for (auto &v : t.values)
      v = std::max(v, 0.0);
  else if (activation == "softmax")
    softmax_last_axis(t);
}

/// Left padding per spatial axis for TensorFlow-style same padding.
IntList pad_before(const TensorShape &in, const TensorShape &out, const WindowParams &p)
{
  IntList pad(p.window.size(), 0);
  if (!p.same)
    return pad;
  for (std::size_t i = 0; i < pad.size(); ++i)
  {
    const auto effective = p.dilation[i] * (p.window[i] - 1) + 1;
    const auto total = std::max<std::int64_t>((out[i + 1] - 1) * p.strides[i] + effective - in[i + 1], 0);
    pad[i] = total / 2;
  }
  return pad;
}

Tensor conv_forward(const LayerNode &node, const Tensor &in, const TensorShape &out_shape)
{
  const auto p = window_params(node);
  const auto pad = pad_before(in.shape, out_shape, p);
  const std::size_t n = p.window.size();
  const auto channels = in.shape.dims().back();
  const auto filters = out_shape.dims().back();

  IntList kernel_dims = p.window;
  kernel_dims.push_back(channels);
  kernel_dims.push_back(filters);
  const auto kernel_strides = row_strides(kernel_dims);
  const auto in_strides = row_strides(in.shape.dims());
  const NdArray *kernel = node.weights && node.weights->kernel ? &*node.weights->kernel : nullptr;
  const NdArray *bias = node.weights && node.weights->bias ? &*node.weights->bias : nullptr;

  Tensor out = Tensor::filled(out_shape, 0.0);
  std::size_t flat = 0;
  IntList in_idx(in.shape.rank());
  IntList k_idx(n + 2);
  for_each_index(out_shape.dims(), [&](const IntList &o) {
    const auto f = o.back();
    double acc = bias ? bias->values[static_cast<std::size_t>(f)] : 0.0;
    if (kernel)
    {
      for_each_index(p.window, [&](const IntList &w) {
        in_idx[0] = o[0];
        for (std::size_t i = 0; i < n; ++i)
        {
          in_idx[i + 1] = o[i + 1] * p.strides[i] + w[i] * p.dilation[i] - pad[i];
          if (in_idx[i + 1] < 0 || in_idx[i + 1] >= in.shape[i + 1])
            return;
          k_idx[i] = w[i];
        }
        k_idx[n + 1] = f;
        for (std::int64_t c = 0; c < channels; ++c)
        {
          in_idx[n + 1] = c;
          k_idx[n] = c;
          acc += in.values[static_cast<std::size_t>(flat_index(in_idx, in_strides))] *
                 kernel->values[static_cast<std::size_t>(flat_index(k_idx, kernel_strides))];
        }
      });
    }
    out.values[flat++] = acc;
  });
  apply_activation(out, node.token_attr("activation", "linear"));
  return out;
}

Tensor pool_forward(const LayerNode &node, const Tensor &in, const TensorShape &out_shape)
{
  const auto p = window_params(node);
  const auto pad = pad_before(in.shape, out_shape, p);
  const bool is_max = traits(node.kind).family == LayerFamily::MaxPooling;
  const std::size_t n = p.window.size();
  const auto in_strides = row_strides(in.shape.dims());

  Tensor out = Tensor::filled(out_shape, 0.0);
  std::size_t flat = 0;
  IntList in_idx(in.shape.rank());
  for_each_index(out_shape.dims(), [&](const IntList &o) {
    double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
    std::int64_t count = 0;
    for_each_index(p.window, [&](const IntList &w) {
      in_idx[0] = o[0];
      in_idx[n + 1] = o[n + 1];
      for (std::size_t i = 0; i < n; ++i)
      {
        in_idx[i + 1] = o[i + 1] * p.strides[i] + w[i] - pad[i];
        if (in_idx[i + 1] < 0 || in_idx[i + 1] >= in.shape[i + 1])
          return;
      }
      const double v = in.values[static_cast<std::size_t>(flat_index(in_idx, in_strides))];
      acc = is_max ? std::max(acc, v) : acc + v;
      ++count;
    });
    out.values[flat++] = is_max ? acc : acc / static_cast<double>(count);
  });
  return out;
}

/// Spatial index remapping shared by padding, cropping and upsampling.
template <typename Map> Tensor remap_forward(const Tensor &in, const TensorShape &out_shape, Map &&map)
{
  const auto in_strides = row_strides(in.shape.dims());
  Tensor out = Tensor::filled(out_shape, 0.0);
  std::size_t flat = 0;
  IntList in_idx(in.shape.rank());
  for_each_index(out_shape.dims(), [&](const IntList &o) {
    bool inside = true;
    for (std::size_t axis = 0; axis < o.size(); ++axis)
    {
      in_idx[axis] = map(axis, o[axis]);
      inside = inside && in_idx[axis] >= 0 && in_idx[axis] < in.shape[axis];
    }
    if (inside)
      out.values[flat] = in.values[static_cast<std::size_t>(flat_index(in_idx, in_strides))];
    ++flat;
  });
  return out;
}

Tensor concat_forward(const std::vector<const Tensor *> &in, const TensorShape &out_shape, std::size_t axis)
{
  Tensor out = Tensor::filled(out_shape, 0.0);
  std::size_t flat = 0;
  IntList in_idx;
  for_each_index(out_shape.dims(), [&](const IntList &o) {
    in_idx = o;
    std::size_t j = 0;
    while (in_idx[axis] >= in[j]->shape[axis])
      in_idx[axis] -= in[j++]->shape[axis];
    out.values[flat++] =
      in[j]->values[static_cast<std::size_t>(flat_index(in_idx, row_strides(in[j]->shape.dims())))];
  });
  return out;
}

Tensor merge_forward(LayerKind kind, const std::vector<const Tensor *> &in, const TensorShape &out_shape)
{
  Tensor out{out_shape, in[0]->values};
  for (std::size_t j = 1; j < in.size(); ++j)
  {
    for (std::size_t i = 0; i < out.values.size(); ++i)
    {
      const double v = in[j]->values[i];
      switch (kind)
      {
        case K::Subtract:
          out.values[i] -= v;
          break;
        case K::Multiply:
          out.values[i] *= v;
          break;
        default:
          out.values[i] += v;
          break;
      }
    }
  }
  if (kind == K::Average)
    for (auto &v : out.values)
      v /= static_cast<double>(in.size());
  return out;
}

Tensor layer_forward(const LayerNode &node, const std::vector<const Tensor *> &in, const TensorShape &out_shape)
{
  const auto &t = traits(node.kind);
  const Tensor &x = *in[0];
  const std::size_t n = static_cast<std::size_t>(t.spatial_rank);

  switch (t.family)
  {
    case LayerFamily::Conv:
      return conv_forward(node, x, out_shape);
    case LayerFamily::MaxPooling:
    case LayerFamily::AveragePooling:
      return pool_forward(node, x, out_shape);
    case LayerFamily::ZeroPadding:
    {
      const auto pad = node.tuple_attr("padding", IntList(2 * n, 1));
      return remap_forward(x, out_shape, [&](std::size_t axis, std::int64_t o) {
        return axis >= 1 && axis <= n ? o - pad[2 * (axis - 1)] : o;
      });
    }
    case LayerFamily::Cropping:
    {
      const auto crop = node.tuple_attr("cropping", IntList(2 * n, 0));
      return remap_forward(x, out_shape, [&](std::size_t axis, std::int64_t o) {
        return axis >= 1 && axis <= n ? o + crop[2 * (axis - 1)] : o;
      });
    }
    case LayerFamily::UpSampling:
    {
      const auto size = node.tuple_attr("size", IntList(n, 2));
      return remap_forward(x, out_shape, [&](std::size_t axis, std::int64_t o) {
        return axis >= 1 && axis <= n ? o / size[axis - 1] : o;
      });
    }
    case LayerFamily::None:
      break;
  }

  switch (node.kind)
  {
    case K::Dense:
    {
      Tensor out;
      if (node.weights && node.weights->kernel)
        out = dense_forward(x, *node.weights->kernel, node.weights->bias);
      else
        out = Tensor::filled(out_shape, 0.0);
      apply_activation(out, node.token_attr("activation", "linear"));
      return out;
    }
    case K::Flatten:
    case K::Reshape:
      return Tensor{out_shape, x.values};
    case K::Add:
    case K::Subtract:
    case K::Multiply:
    case K::Average:
      return merge_forward(node.kind, in, out_shape);
    case K::Concatenate:
    {
      std::int64_t axis = node.int_attr("axis", -1);
      if (axis < 0)
        axis += static_cast<std::int64_t>(x.shape.rank());
      return concat_forward(in, out_shape, static_cast<std::size_t>(axis));
    }
    case K::ReLU:
    {
      Tensor out = x;
      apply_activation(out, "relu");
      return out;
    }
    case K::LeakyReLU:
    {
      const double alpha = node.float_attr("alpha", 0.3);
      Tensor out = x;
      for (auto &v : out.values)
        v = v < 0.0 ? alpha * v : v;
      return out;
    }
    case K::Softmax:
    {
      Tensor out = x;
      softmax_last_axis(out);
      return out;
    }
    default:
      throw UnsupportedKind(std::string{t.name} + " has no value semantics");
  }
}

} // namespace

Tensor dense_forward(const Tensor &in, const NdArray &kernel, const std::optional<NdArray> &bias)
{
  const auto rows = kernel.shape.at(0);
  const auto units = kernel.shape.at(1);
  if (in.shape.dims().back() != rows)
    throw std::invalid_argument("dense kernel rows do not match the innermost axis");

  IntList out_dims = in.shape.dims();
  out_dims.back() = units;
  Tensor out = Tensor::filled(TensorShape{out_dims}, 0.0);
  const auto blocks = static_cast<std::size_t>(in.shape.elements() / rows);
  for (std::size_t b = 0; b < blocks; ++b)
  {
    const double *x = in.values.data() + b * static_cast<std::size_t>(rows);
    double *y = out.values.data() + b * static_cast<std::size_t>(units);
    for (std::int64_t j = 0; j < units; ++j)
    {
      double acc = bias ? bias->values[static_cast<std::size_t>(j)] : 0.0;
      for (std::int64_t i = 0; i < rows; ++i)
        acc += x[i] * kernel.values[static_cast<std::size_t>(i * units + j)];
      y[j] = acc;
    }
  }
  return out;
}

ExecResult execute_model(const ModelGraph &model, const TensorMap &inputs)
{
  ExecResult result;
  const auto shapes = infer_shapes(model);
  if (!shapes.ok())
  {
    result.diagnostic = shapes.diagnostic;
    return result;
  }

  for (const auto &in : model.inputs)
  {
    auto it = inputs.find(in.id);
    if (it != inputs.end())
    {
      if (it->second.shape != in.shape)
        throw std::invalid_argument("input '" + in.id + "' expects shape " + in.shape.to_string() + ", got " +
                                    it->second.shape.to_string());
      result.tensors.emplace(in.id, it->second);
    }
    else if (in.fill)
      result.tensors.emplace(in.id, Tensor::filled(in.shape, *in.fill));
    else
      throw std::invalid_argument("no value for input '" + in.id + "'");
  }

  std::unordered_map<std::string_view, const LayerNode *> by_id;
  for (const auto &node : model.nodes)
    by_id.emplace(node.id, &node);

  std::vector<const Tensor *> in;
  for (const auto &id : shapes.order)
  {
    const auto &node = *by_id.at(id);
    if (!traits(node.kind).value_executable)
      throw UnsupportedKind(std::string{kind_name(node.kind)} + " at '" + id + "' has no value semantics");
    in.clear();
    for (const auto &src : node.inputs)
      in.push_back(&result.tensors.at(src));
    result.tensors.emplace(id, layer_forward(node, in, shapes.shapes.at(id)));
  }
  return result;
}

} // namespace nnrepair
