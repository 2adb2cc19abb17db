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

#include "nnrepair/weights.h"

namespace nnrepair
{

NdArray random_array(const IntList &shape, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NdArray array{shape, std::vector<double>(static_cast<std::size_t>(product(shape)))};
  for (auto &v : array.values)
    v = unit(rng);
  return array;
}

std::shared_ptr<const WeightSpec> random_weights(const LayerNode &node, const TensorShape &in, std::mt19937_64 &rng,
                                                 bool with_bias)
{
  const auto shapes = expected_weights(node, in);
  if (!shapes)
    return nullptr;
  auto spec = std::make_shared<WeightSpec>();
  spec->kernel = random_array(shapes->kernel, rng);
  if (with_bias && shapes->bias)
    spec->bias = random_array(*shapes->bias, rng);
  return spec;
}

} // namespace nnrepair
