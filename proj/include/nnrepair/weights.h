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

#ifndef NNREPAIR_WEIGHTS_H
#define NNREPAIR_WEIGHTS_H

#include <memory>
#include <random>

#include "nnrepair/semantics.h"

namespace nnrepair
{

/**
 * Weights of the shapes expected_weights gives for (node, in), values
 * uniform in [0, 1). The bias is left out when with_bias is false or the
 * kind has none. Returns nullptr for kinds without weights.
 */
std::shared_ptr<const WeightSpec> random_weights(const LayerNode &node, const TensorShape &in, std::mt19937_64 &rng,
                                                 bool with_bias = true);

NdArray random_array(const IntList &shape, std::mt19937_64 &rng);

} // namespace nnrepair

#endif // NNREPAIR_WEIGHTS_H
