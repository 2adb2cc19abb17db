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

#ifndef NNREPAIR_EXECUTE_H
#define NNREPAIR_EXECUTE_H

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnrepair/semantics.h"

namespace nnrepair
{

/// Raised when value execution reaches a shape-only layer.
class UnsupportedKind : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Row-major tensor. values.size() == shape.elements().
struct Tensor
{
  TensorShape shape;
  std::vector<double> values;

  Tensor() : values(1, 0.0) {}
  /// Throws std::invalid_argument on a length mismatch.
  Tensor(TensorShape shape, std::vector<double> values);

  static Tensor filled(const TensorShape &shape, double value);
};

using TensorMap = std::map<std::string, Tensor>;

struct ExecResult
{
  TensorMap tensors; // model inputs and every executed layer
  std::optional<Diagnostic> diagnostic;

  bool ok() const { return !diagnostic.has_value(); }
};

/**
 * Runs the model on concrete values. Shapes are checked first and a violation
 * is returned instead of executing anything. Constant inputs default to their
 * fill value; other inputs must be given. Layers without weights execute with
 * a zero kernel and bias. Conv and pooling use TensorFlow's same padding
 * (extra padding on the right), average pooling ignores padded cells.
 *
 * Throws UnsupportedKind for layers outside the value subset and
 * std::invalid_argument for missing or misshapen inputs.
 */
ExecResult execute_model(const ModelGraph &model, const TensorMap &inputs);

/// Dense rule on one tensor: the innermost axis is multiplied by the kernel.
Tensor dense_forward(const Tensor &in, const NdArray &kernel, const std::optional<NdArray> &bias);

} // namespace nnrepair

#endif // NNREPAIR_EXECUTE_H
