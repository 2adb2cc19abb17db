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

#include "nnrepair/shape.h"

#include <stdexcept>

namespace nnrepair
{

std::string format_list(const IntList &values)
{
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i)
  {
    if (i)
      out += ',';
    out += std::to_string(values[i]);
  }
  out += ']';
  return out;
}

std::int64_t product(const IntList &values)
{
  std::int64_t p = 1;
  for (auto v : values)
    p *= v;
  return p;
}

TensorShape::TensorShape(IntList dims) : _dims{std::move(dims)}
{
  if (_dims.empty())
    throw std::invalid_argument("tensor shape needs at least the batch axis");
  for (auto d : _dims)
    if (d < 1)
      throw std::invalid_argument("dimension size must be >= 1 in " + format_list(_dims));
}

TensorShape TensorShape::batched(const IntList &dims_without_batch)
{
  IntList dims{1};
  dims.insert(dims.end(), dims_without_batch.begin(), dims_without_batch.end());
  return TensorShape{std::move(dims)};
}

} // namespace nnrepair
