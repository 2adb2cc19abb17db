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

#ifndef NNREPAIR_REPAIR_FIXES_H
#define NNREPAIR_REPAIR_FIXES_H

#include <random>
#include <vector>

#include "nnrepair/repair.h"

namespace nnrepair::detail
{

struct FixContext
{
  const RepairConfig &cfg;
  std::mt19937_64 &rng;
  const ModelGraph &model;
  const ShapeResult &shapes;
  const Diagnostic &diag;
  int round;
};

std::vector<FixCandidate> fix_dimension_error(const FixContext &ctx);
std::vector<FixCandidate> fix_input_shape(const FixContext &ctx);
std::vector<FixCandidate> fix_argument_error(const FixContext &ctx);
std::vector<FixCandidate> fix_weight_shape(const FixContext &ctx);
std::vector<FixCandidate> fix_window_overflow(const FixContext &ctx);

/// Layer of kind `kind` built from `node`, tuple attributes truncated or
/// padded to the new rank and weights regenerated for `in`.
LayerNode adapt_layer(const LayerNode &node, LayerKind kind, const TensorShape &in, std::mt19937_64 &rng);

/// Target that brings `dims` (without batch) to `rank` axes (with batch):
/// appends size-1 axes or multiplies the trailing excess axes together.
IntList reshape_to_rank(const IntList &dims, std::size_t rank);

} // namespace nnrepair::detail

#endif // NNREPAIR_REPAIR_FIXES_H
