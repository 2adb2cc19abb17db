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

#ifndef NNREPAIR_SEMANTICS_H
#define NNREPAIR_SEMANTICS_H

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnrepair/diagnostic.h"
#include "nnrepair/model.h"

namespace nnrepair
{

// Shape-level layer semantics. Every check returns std::nullopt when the
// precondition holds. Diagnostics from the individual checks carry no
// layer_id/location; infer_shapes fills those in.

/// Kernel/bias shapes a layer needs for a given input.
///   Dense       kernel (in_last, units)                bias (units)
///   ConvND      kernel (k_1..k_N, in_channels, filters) bias (filters)
///   Embedding   kernel (input_dim, output_dim)
///   BatchNorm   kernel (4, channels), rows gamma/beta/mean/variance
///   SimpleRNN   kernel (features + units, units)        bias (units)
///   LSTM        kernel (features + units, 4 * units)    bias (4 * units)
/// The recurrent kernels stack the input and recurrent matrices row-wise.
struct WeightShapes
{
  IntList kernel;
  std::optional<IntList> bias;
};

/// std::nullopt for kinds without weights.
std::optional<WeightShapes> expected_weights(const LayerNode &node, const TensorShape &in);

/// Rank a layer requires (exact or minimum); nullopt if unconstrained.
struct RankRequirement
{
  std::size_t rank;
  bool exact;
};
std::optional<RankRequirement> required_rank(LayerKind kind);

std::optional<Diagnostic> check_min_dimensions(const TensorShape &shape, std::size_t min_rank);
std::optional<Diagnostic> check_exact_dimensions(const TensorShape &shape, std::size_t rank);
std::optional<Diagnostic> check_weight_consistency(const LayerNode &node, const TensorShape &in);
std::optional<Diagnostic> check_multi_input_shapes(const LayerNode &node, std::span<const TensorShape> in);

/**
 * Argument consistency. Conv: strides > 1 together with dilation > 1.
 * With input shapes also Reshape element counts and Concatenate axis range.
 */
std::optional<Diagnostic> check_arg_consistency(const LayerNode &node, std::span<const TensorShape> in = {});

/// Valid-padding windows must fit: conv effective kernel, pool size, crop.
std::optional<Diagnostic> check_window_fits(const LayerNode &node, const TensorShape &in);

/// All preconditions of the node, in the order the semantics checks them.
std::optional<Diagnostic> check_layer(const LayerNode &node, std::span<const TensorShape> in);

/// The layer's output shape. Requires check_layer to have passed.
TensorShape output_shape(const LayerNode &node, std::span<const TensorShape> in);

using ShapeMap = std::map<std::string, TensorShape>;

/**
 * Result of running the shape semantics. `shapes` holds every model input
 * and every layer that ran before the first violation.
 */
struct ShapeResult
{
  ShapeMap shapes;
  std::vector<std::string> order;
  std::optional<Diagnostic> diagnostic;

  bool ok() const { return !diagnostic.has_value(); }
};

/// Walks topo_order and aborts at the first violated precondition.
ShapeResult infer_shapes(const ModelGraph &model);

/// Conv/pool output size along one axis.
std::int64_t window_output(std::int64_t in, std::int64_t window, std::int64_t stride, bool same_padding);

/// Per-axis parameters of conv and pooling layers with defaults applied.
struct WindowParams
{
  IntList window;   // kernel_size or pool_size
  IntList strides;
  IntList dilation; // all ones for pooling
  bool same = false;
};
WindowParams window_params(const LayerNode &node);

/// Attribute value with conv/pool defaults applied; nullopt if unset.
std::optional<AttrValue> effective_attr(const LayerNode &node, std::string_view attr);

} // namespace nnrepair

#endif // NNREPAIR_SEMANTICS_H
