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

#ifndef NNREPAIR_SHAPE_H
#define NNREPAIR_SHAPE_H

#include <cstdint>
#include <string>
#include <vector>

namespace nnrepair
{

using IntList = std::vector<std::int64_t>;

/// Renders a list the way diagnostics print shapes: "[1,16]".
std::string format_list(const IntList &values);

std::int64_t product(const IntList &values);

/**
 * Ordered list of positive dimension sizes. Position 0 is the batch axis and
 * is always present, so every shape has rank >= 1.
 */
class TensorShape
{
public:
  TensorShape() : _dims{1} {}

  /// Throws std::invalid_argument if dims is empty or holds a size < 1.
  explicit TensorShape(IntList dims);

  /// Prepends a batch axis of size 1 to a shape given without batch.
  static TensorShape batched(const IntList &dims_without_batch);

  const IntList &dims() const { return _dims; }
  std::size_t rank() const { return _dims.size(); }
  std::int64_t operator[](std::size_t i) const { return _dims[i]; }
  std::int64_t elements() const { return product(_dims); }

  /// The dims after the batch axis, as written in model files.
  IntList without_batch() const { return IntList(_dims.begin() + 1, _dims.end()); }

  std::string to_string() const { return format_list(_dims); }

  bool operator==(const TensorShape &other) const = default;
  auto operator<=>(const TensorShape &other) const = default;

private:
  IntList _dims;
};

} // namespace nnrepair

#endif // NNREPAIR_SHAPE_H
