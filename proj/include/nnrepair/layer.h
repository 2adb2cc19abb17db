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

#ifndef NNREPAIR_LAYER_H
#define NNREPAIR_LAYER_H

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nnrepair/shape.h"

namespace nnrepair
{

/// Thrown when a node or graph violates a structural invariant.
class InvalidModel : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// One of: integer scalar, integer tuple, enum token, float scalar, boolean.
using AttrValue = std::variant<std::int64_t, IntList, std::string, double, bool>;

/// Python-ish rendering used in edit descriptions and pseudo-code: 3, (2,2), (2,), 'same', 0.3, True
std::string format_attr(const AttrValue &value);

enum class LayerKind
{
  Dense,
  Conv1D,
  Conv2D,
  Conv3D,
  MaxPooling1D,
  MaxPooling2D,
  MaxPooling3D,
  AveragePooling1D,
  AveragePooling2D,
  AveragePooling3D,
  Flatten,
  Reshape,
  ZeroPadding1D,
  ZeroPadding2D,
  ZeroPadding3D,
  Cropping1D,
  Cropping2D,
  Cropping3D,
  UpSampling1D,
  UpSampling2D,
  UpSampling3D,
  Add,
  Subtract,
  Multiply,
  Average,
  Concatenate,
  ReLU,
  LeakyReLU,
  Softmax,
  Embedding,
  BatchNormalization,
  SimpleRNN,
  LSTM,
};

/// Layers that exist in 1D/2D/3D variants.
enum class LayerFamily
{
  None,
  Conv,
  MaxPooling,
  AveragePooling,
  ZeroPadding,
  Cropping,
  UpSampling,
};

struct KindTraits
{
  LayerKind kind;
  std::string_view name;
  std::string_view id_prefix;
  LayerFamily family;
  int spatial_rank; // N of an ND family member, 0 otherwise
  bool merge;
  bool has_weights;
  bool value_executable;
};

const KindTraits &traits(LayerKind kind);
std::string_view kind_name(LayerKind kind);
std::optional<LayerKind> parse_kind(std::string_view name);
std::span<const LayerKind> all_kinds();

/// The member of kind's family with the given spatial rank, if there is one.
std::optional<LayerKind> family_variant(LayerKind kind, int spatial_rank);

enum class AttrType
{
  Int,
  IntTuple,
  Token,
  Float,
  Bool,
};

/// Tuple length rules. Positive values are literal lengths.
inline constexpr int kAnyLength = 0;
inline constexpr int kSpatialLength = -1; // N for an ND layer
inline constexpr int kPairLength = -2;    // 2N for an ND layer, (left,right) per axis

struct AttrSpec
{
  std::string_view name;
  AttrType type;
  bool required;
  int tuple_length = kAnyLength;
  std::int64_t min_value = 1;
  std::vector<std::string_view> tokens = {};
};

std::span<const AttrSpec> attr_specs(LayerKind kind);
const AttrSpec *find_attr_spec(LayerKind kind, std::string_view name);

/// Concrete tuple length of spec for kind, or kAnyLength.
int tuple_length(LayerKind kind, const AttrSpec &spec);

/// Dense numeric array stored row-major with an explicit shape.
struct NdArray
{
  IntList shape;
  std::vector<double> values;

  bool operator==(const NdArray &) const = default;
};

/// kernel and bias, both optional. Stacked layouts are used where a layer has
/// more parameter groups (see expected_weights in checks.h).
struct WeightSpec
{
  std::optional<NdArray> kernel;
  std::optional<NdArray> bias;

  bool operator==(const WeightSpec &) const = default;
};

struct LayerNode
{
  std::string id;
  LayerKind kind = LayerKind::ReLU;
  std::map<std::string, AttrValue> attrs;
  std::shared_ptr<const WeightSpec> weights;
  std::vector<std::string> inputs;

  const AttrValue *attr(std::string_view name) const;

  std::int64_t int_attr(std::string_view name, std::int64_t fallback) const;
  IntList tuple_attr(std::string_view name, const IntList &fallback) const;
  std::string token_attr(std::string_view name, std::string_view fallback) const;
  double float_attr(std::string_view name, double fallback) const;
  bool bool_attr(std::string_view name, bool fallback) const;
};

/// Weights compare by value; a null pointer equals another null pointer only.
bool same_weights(const std::shared_ptr<const WeightSpec> &a, const std::shared_ptr<const WeightSpec> &b);

/// Checks input arity and the attribute schema. Throws InvalidModel.
void validate_node(const LayerNode &node);

} // namespace nnrepair

#endif // NNREPAIR_LAYER_H
