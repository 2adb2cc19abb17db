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

#ifndef NNREPAIR_TESTS_SUPPORT_H
#define NNREPAIR_TESTS_SUPPORT_H

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "nnrepair/edit.h"
#include "nnrepair/generator.h"
#include "nnrepair/io.h"
#include "nnrepair/model.h"
#include "nnrepair/repair.h"
#include "nnrepair/semantics.h"

namespace nnrepair::test
{

inline ModelGraph load_fixture(const std::string &name)
{
  return load_model(std::filesystem::path{NNREPAIR_FIXTURES} / name);
}

inline LayerNode make_node(std::string id, LayerKind kind, std::vector<std::string> inputs,
                           std::map<std::string, AttrValue> attrs = {})
{
  LayerNode n;
  n.id = std::move(id);
  n.kind = kind;
  n.inputs = std::move(inputs);
  n.attrs = std::move(attrs);
  return n;
}

/// One layer on one input; `dims` excludes the batch axis.
inline ModelGraph single_layer(LayerNode node, const IntList &dims)
{
  ModelGraph m;
  m.name = "single";
  m.inputs.push_back({"in0", TensorShape::batched(dims), std::nullopt});
  node.inputs = {"in0"};
  m.outputs = {node.id};
  m.nodes.push_back(std::move(node));
  return m;
}

// Independent oracles. None of these call into the library's shape rules.

/// Conv/pool output length along one axis.
inline std::int64_t oracle_window_len(std::int64_t in, std::int64_t k, std::int64_t stride, std::int64_t dilation,
                                      bool same)
{
  if (same)
    return (in + stride - 1) / stride;
  const std::int64_t span = dilation * (k - 1) + 1;
  return (in - span) / stride + 1;
}

/// Dense over the innermost axis: out[r][u] = sum_i in[r][i] * w[i][u] + b[u].
inline std::vector<double> oracle_dense(const std::vector<double> &in, std::size_t rows, std::size_t features,
                                        const std::vector<double> &kernel, std::size_t units,
                                        const std::vector<double> &bias)
{
  std::vector<double> out(rows * units, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t u = 0; u < units; ++u)
    {
      double acc = bias.empty() ? 0.0 : bias[u];
      for (std::size_t i = 0; i < features; ++i)
        acc += in[r * features + i] * kernel[i * units + u];
      out[r * units + u] = acc;
    }
  return out;
}

/// Progress between consecutive diagnostics of a recursion path.
inline bool oracle_progress(const Diagnostic &next, const Diagnostic &prev)
{
  return std::llabs(next.badness) < std::llabs(prev.badness) || next.location >= prev.location;
}

inline bool path_makes_progress(const std::vector<Diagnostic> &trace)
{
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (!oracle_progress(trace[i], trace[i - 1]))
      return false;
  return true;
}

inline std::int64_t oracle_cost(const Edit &edit)
{
  switch (edit.index())
  {
    case 0:
    case 1:
      return 1;
    case 2:
      return 5;
    default:
      return 10;
  }
}

/// Sound: passes the shape checks, replays from the original, costs add up.
inline bool sound_candidate(const ModelGraph &original, const FixCandidate &c)
{
  if (!infer_shapes(c.model).ok())
    return false;
  std::int64_t cost = 0;
  for (const auto &e : c.edits)
    cost += oracle_cost(e);
  if (cost != c.change_value)
    return false;
  return structurally_equal(apply_edits(original, c.edits), c.model);
}

/// The fuzz corpus of the repair-rate criterion.
inline GenConfig fuzz_config(std::uint64_t seed)
{
  GenConfig cfg;
  cfg.seed = seed;
  cfg.family = Family::Mixed;
  cfg.graph_mode = true;
  cfg.dim_min = 1;
  cfg.dim_max = 4;
  cfg.layers_min = 3;
  cfg.layers_max = 12;
  cfg.inject_bugs = 1 + static_cast<int>(seed % 3);
  return cfg;
}

} // namespace nnrepair::test

#endif // NNREPAIR_TESTS_SUPPORT_H
