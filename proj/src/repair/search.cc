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

#include <algorithm>
#include <cstdlib>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "fixes.h"
#include "nnrepair/weights.h"

namespace nnrepair
{

namespace
{

template <class... Ts> struct Overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

bool replaces(const Edit &e, const std::string &node)
{
  const auto *r = std::get_if<ReplaceLayer>(&e);
  return r && r->node == node;
}

/// Ranking key: cost, then (location, kind) of every edit, then discovery.
struct RankKey
{
  std::int64_t cost = 0;
  std::vector<std::pair<std::size_t, int>> edits;
  std::size_t seq = 0;

  auto operator<=>(const RankKey &) const = default;
};

RankKey rank_key(const FixCandidate &c, std::size_t seq)
{
  RankKey key{c.change_value, {}, seq};
  std::unordered_map<std::string, std::size_t> location;
  const auto order = topo_order(c.model);
  for (std::size_t i = 0; i < order.size(); ++i)
    location.emplace(order[i], i);
  for (const auto &e : c.edits)
  {
    std::size_t loc = order.size();
    if (const auto *ci = std::get_if<InsertConstInput>(&e))
    {
      for (const auto &node : c.model.nodes)
        if (std::find(node.inputs.begin(), node.inputs.end(), ci->id) != node.inputs.end())
          loc = std::min(loc, location.at(node.id));
    }
    else if (auto it = location.find(edit_subject(e)); it != location.end())
    {
      loc = it->second;
    }
    key.edits.emplace_back(loc, static_cast<int>(edit_kind(e)));
  }
  return key;
}

/// The edited layers and everything downstream of them.
std::unordered_set<std::string> affected_nodes(const FixCandidate &c)
{
  std::unordered_set<std::string> affected;
  for (const auto &e : c.edits)
  {
    affected.insert(edit_subject(e));
    if (const auto *ins = std::get_if<InsertLayer>(&e))
      affected.insert(ins->before);
  }
  for (const auto &id : topo_order(c.model))
  {
    const auto *node = c.model.find_node(id);
    for (const auto &src : node->inputs)
      if (affected.count(src))
      {
        affected.insert(id);
        break;
      }
  }
  return affected;
}

/// Deeper failures first, then the ones closest to valid.
bool deeper_first(const FixCandidate &a, const FixCandidate &b)
{
  const auto &da = a.trace.back();
  const auto &db = b.trace.back();
  if (da.location != db.location)
    return da.location > db.location;
  return std::llabs(da.badness) < std::llabs(db.badness);
}

} // namespace

std::int64_t edit_cost(const Edit &edit)
{
  switch (edit_kind(edit))
  {
    case EditKind::ArgChange:
    case EditKind::WeightRegen:
      return 1;
    case EditKind::ReplaceLayer:
      return 5;
    case EditKind::InsertLayer:
    case EditKind::InsertConstInput:
      return 10;
  }
  return 0;
}

std::int64_t change_value(std::span<const Edit> edits)
{
  std::int64_t total = 0;
  for (const auto &e : edits)
    total += edit_cost(e);
  return total;
}

bool is_progress(const Diagnostic &next, const Diagnostic &previous)
{
  return std::llabs(next.badness) < std::llabs(previous.badness) || next.location >= previous.location;
}

bool ranks_before(const FixCandidate &a, std::size_t a_seq, const FixCandidate &b, std::size_t b_seq)
{
  return rank_key(a, a_seq) < rank_key(b, b_seq);
}

std::vector<Edit> normalize_edits(std::vector<Edit> edits, const ModelGraph *origin)
{
  const auto reverts = [origin](const ArgChange &a) {
    if (a.new_value == a.old_value)
      return true;
    if (!origin || !a.new_value)
      return false;
    const auto *node = origin->find_node(a.node);
    return node && effective_attr(*node, a.attr) == a.new_value;
  };
  std::vector<Edit> out;
  for (auto &edit : edits)
  {
    if (auto *change = std::get_if<ArgChange>(&edit))
    {
      bool folded = false;
      for (std::size_t i = out.size(); i-- > 0 && !folded;)
      {
        auto &prev = out[i];
        if (auto *r = std::get_if<ReplaceLayer>(&prev); r && r->node == change->node)
        {
          if (change->new_value)
            r->replacement.attrs[change->attr] = *change->new_value;
          else
            r->replacement.attrs.erase(change->attr);
          folded = true;
        }
        else if (auto *ins = std::get_if<InsertLayer>(&prev); ins && ins->layer.id == change->node)
        {
          if (change->new_value)
            ins->layer.attrs[change->attr] = *change->new_value;
          else
            ins->layer.attrs.erase(change->attr);
          folded = true;
        }
        else if (auto *a = std::get_if<ArgChange>(&prev); a && a->node == change->node && a->attr == change->attr)
        {
          a->new_value = change->new_value;
          if (reverts(*a))
            out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
          folded = true;
        }
      }
      if (!folded && !reverts(*change))
        out.push_back(std::move(edit));
      continue;
    }
    if (const auto *regen = std::get_if<WeightRegen>(&edit))
    {
      for (std::size_t i = out.size(); i-- > 0;)
      {
        if (replaces(out[i], regen->node))
          break;
        if (const auto *w = std::get_if<WeightRegen>(&out[i]); w && w->node == regen->node)
        {
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
          break;
        }
      }
    }
    out.push_back(std::move(edit));
  }
  return out;
}

struct RepairSession::Context
{
  const ModelGraph *origin = nullptr;
  std::optional<std::int64_t> bound; // costs above this cannot rank
  std::size_t depth_cap = 0;
  std::optional<FixCandidate> best;
  std::size_t best_seq = 0;
  std::size_t seq = 0;
  std::size_t found = 0;
  bool exhausted = false;
  std::unordered_set<std::string> visited;
};

RepairSession::RepairSession(RepairConfig cfg) : _cfg(std::move(cfg)), _rng(_cfg.seed)
{
  if (_cfg.max_fixes < 1 || _cfg.top_k < 1)
    throw std::invalid_argument("max_fixes and top_k must be at least 1");
}

std::vector<FixCandidate> RepairSession::generate(const ModelGraph &model, const ShapeResult &shapes,
                                                  const Diagnostic &diag, int round)
{
  const detail::FixContext ctx{_cfg, _rng, model, shapes, diag, round};
  std::vector<FixCandidate> out;
  switch (diag.kind)
  {
    case ErrorKind::DimensionError:
      out = detail::fix_dimension_error(ctx);
      break;
    case ErrorKind::InputShapeMismatch:
      out = detail::fix_input_shape(ctx);
      break;
    case ErrorKind::ArgumentError:
      out = detail::fix_argument_error(ctx);
      break;
    case ErrorKind::WeightShapeError:
      out = detail::fix_weight_shape(ctx);
      break;
    case ErrorKind::WindowOverflow:
      out = detail::fix_window_overflow(ctx);
      break;
  }
  if (out.empty() && round == 1)
    throw EmptyFixSet(std::string{"no fix applies to "} + std::string{kind_text(diag.kind)} + " at " + diag.layer_id);
  return out;
}

std::vector<FixCandidate> RepairSession::error_specific_fixes(const ModelGraph &model, const Diagnostic &diag,
                                                              int round)
{
  return generate(model, infer_shapes(model), diag, round);
}

std::optional<Diagnostic> RepairSession::settle(const ModelGraph &origin, FixCandidate &candidate)
{
  for (std::size_t guard = 0; guard <= candidate.model.nodes.size(); ++guard)
  {
    auto result = infer_shapes(candidate.model);
    if (result.ok())
      return std::nullopt;
    const auto &diag = *result.diagnostic;
    if (diag.kind != ErrorKind::WeightShapeError || !affected_nodes(candidate).count(diag.layer_id))
      return diag;
    const auto &node = *candidate.model.find_node(diag.layer_id);
    const auto &in = result.shapes.at(node.inputs.at(0));
    const bool with_bias = node.weights && node.weights->bias.has_value();
    WeightRegen regen{node.id, random_weights(node, in, _rng, with_bias)};
    candidate.model = apply_edit(candidate.model, regen);
    candidate.edits = normalize_edits([&] {
      auto edits = std::move(candidate.edits);
      edits.emplace_back(std::move(regen));
      return edits;
    }(), &origin);
    candidate.change_value = change_value(candidate.edits);
  }
  return infer_shapes(candidate.model).diagnostic;
}

void RepairSession::search(Context &ctx, const FixCandidate &state, std::size_t depth)
{
  _stats.max_depth = std::max(_stats.max_depth, depth);
  const auto &diag = state.trace.back();
  const std::size_t found_before = ctx.found;

  for (int round = 1; round <= _cfg.max_fixes; ++round)
  {
    std::vector<FixCandidate> candidates;
    try
    {
      candidates = generate(state.model, infer_shapes(state.model), diag, round);
    }
    catch (const EmptyFixSet &)
    {
      return;
    }
    if (candidates.empty())
      return;

    std::vector<FixCandidate> failing;
    for (auto &c : candidates)
    {
      if (_stats.evaluations >= _limit)
      {
        ctx.exhausted = true;
        break;
      }
      FixCandidate child;
      child.model = std::move(c.model);
      {
        auto edits = state.edits;
        edits.insert(edits.end(), c.edits.begin(), c.edits.end());
        const auto raw = edits.size();
        child.edits = normalize_edits(std::move(edits), ctx.origin);
        if (child.edits.size() < raw)
          child.model = apply_edits(*ctx.origin, child.edits);
      }
      child.change_value = change_value(child.edits);
      if ((ctx.best && child.change_value > ctx.best->change_value) || (ctx.bound && child.change_value > *ctx.bound))
        continue;
      if (!ctx.visited.insert(structural_key(child.model)).second)
        continue;

      child.trace = state.trace;
      auto next = settle(*ctx.origin, child);
      ++_stats.evaluations;
      const auto seq = ctx.seq++;
      if (!next)
      {
        ++ctx.found;
        ++_stats.working;
        if (_stats.cheapest_working < 0 || child.change_value < _stats.cheapest_working)
          _stats.cheapest_working = child.change_value;
        if (!ctx.best || ranks_before(child, seq, *ctx.best, ctx.best_seq))
        {
          ctx.best = child;
          ctx.best_seq = seq;
        }
      }
      else if (is_progress(*next, diag) && depth + 1 < ctx.depth_cap)
      {
        child.trace.push_back(*next);
        failing.push_back(std::move(child));
      }
    }

    std::stable_sort(failing.begin(), failing.end(), deeper_first);
    for (const auto &f : failing)
    {
      if (ctx.exhausted)
        break;
      if ((ctx.best && f.change_value >= ctx.best->change_value) || (ctx.bound && f.change_value >= *ctx.bound))
        continue;
      search(ctx, f, depth + 1);
    }
    if (ctx.found > found_before || ctx.exhausted)
      return;
  }
}

FixCandidate RepairSession::complete(const ModelGraph &origin, FixCandidate start, std::size_t depth_cap,
                                     std::optional<std::int64_t> bound)
{
  Context ctx;
  ctx.origin = &origin;
  ctx.bound = bound;
  ctx.depth_cap = depth_cap;
  ctx.visited.insert(structural_key(start.model));
  search(ctx, start, 0);
  if (!ctx.best)
    throw NoFix("no working fix for " + start.trace.back().layer_id + " within the search budget");
  return std::move(*ctx.best);
}

FixCandidate RepairSession::find_fix_with_minimal_change(const ModelGraph &model, const Diagnostic &diag)
{
  _stats = {};
  _limit = _cfg.max_evaluations;
  FixCandidate start{model, {}, 0, {diag}};
  return complete(model, std::move(start), model.nodes.size() + 5);
}

std::vector<FixCandidate> RepairSession::find_fixes(const ModelGraph &model)
{
  _stats = {};
  _limit = _cfg.max_evaluations;
  const auto shapes = infer_shapes(model);
  if (shapes.ok())
    return {FixCandidate{model, {}, 0, {}}};
  const auto &diag = *shapes.diagnostic;
  const std::size_t depth_cap = model.nodes.size() + 5;

  std::vector<std::pair<FixCandidate, std::size_t>> results;
  std::vector<FixCandidate> candidates;
  try
  {
    candidates = generate(model, shapes, diag, 1);
  }
  catch (const EmptyFixSet &)
  {
  }
  // Working candidates first, so that their costs bound the completions.
  std::set<std::string> distinct;
  std::multiset<std::int64_t> costs;
  const auto keep = [&](FixCandidate c, std::size_t seq) {
    if (distinct.insert(structural_key(c.model)).second)
      costs.insert(c.change_value);
    results.emplace_back(std::move(c), seq);
  };
  const auto bound = [&]() -> std::optional<std::int64_t> {
    if (costs.size() < static_cast<std::size_t>(_cfg.top_k))
      return std::nullopt;
    return *std::next(costs.begin(), _cfg.top_k - 1);
  };

  std::vector<std::pair<FixCandidate, std::size_t>> failing;
  for (std::size_t i = 0; i < candidates.size(); ++i)
  {
    auto &c = candidates[i];
    FixCandidate child{std::move(c.model), normalize_edits(std::move(c.edits), &model), 0, {diag}};
    child.change_value = change_value(child.edits);
    auto next = settle(model, child);
    ++_stats.evaluations;
    if (!next)
    {
      ++_stats.working;
      keep(std::move(child), i);
      continue;
    }
    child.trace.push_back(*next);
    failing.emplace_back(std::move(child), i);
  }
  std::stable_sort(failing.begin(), failing.end(), [](const auto &a, const auto &b) {
    return deeper_first(a.first, b.first);
  });
  // Each completion gets an even share of what is left of the budget.
  constexpr std::size_t kMinShare = 20;
  const std::size_t budget_end = _cfg.max_evaluations;
  for (std::size_t i = 0; i < failing.size(); ++i)
  {
    auto &[child, seq] = failing[i];
    const auto limit = bound();
    if (limit && child.change_value >= *limit)
      continue;
    const std::size_t left = budget_end > _stats.evaluations ? budget_end - _stats.evaluations : 0;
    _limit = _stats.evaluations + std::max(kMinShare, left / (failing.size() - i));
    try
    {
      keep(complete(model, std::move(child), depth_cap, limit), seq);
    }
    catch (const NoFix &)
    {
    }
  }
  if (results.empty())
  {
    // Later regeneration rounds only run inside the minimal-change search.
    FixCandidate start{model, {}, 0, {diag}};
    _limit = _stats.evaluations + _cfg.max_evaluations;
    try
    {
      results.emplace_back(complete(model, std::move(start), depth_cap), 0);
    }
    catch (const NoFix &)
    {
    }
  }
  if (results.empty())
    throw NoFix("no working fix for " + diag.layer_id + " within the search budget");

  std::vector<std::pair<RankKey, std::size_t>> keys;
  for (std::size_t i = 0; i < results.size(); ++i)
    keys.emplace_back(rank_key(results[i].first, results[i].second), i);
  std::sort(keys.begin(), keys.end());

  std::vector<FixCandidate> ranked;
  std::unordered_set<std::string> seen;
  for (const auto &[key, i] : keys)
  {
    if (ranked.size() >= static_cast<std::size_t>(_cfg.top_k))
      break;
    if (seen.insert(structural_key(results[i].first.model)).second)
      ranked.push_back(std::move(results[i].first));
  }
  for (const auto &c : ranked)
    if (_stats.cheapest_working < 0 || c.change_value < _stats.cheapest_working)
      _stats.cheapest_working = c.change_value;
  return ranked;
}

std::vector<FixCandidate> error_specific_fixes(const RepairConfig &cfg, const ModelGraph &model,
                                               const Diagnostic &diag)
{
  return RepairSession{cfg}.error_specific_fixes(model, diag);
}

FixCandidate find_fix_with_minimal_change(const RepairConfig &cfg, const ModelGraph &model, const Diagnostic &diag)
{
  return RepairSession{cfg}.find_fix_with_minimal_change(model, diag);
}

std::vector<FixCandidate> find_fixes(const RepairConfig &cfg, const ModelGraph &model)
{
  return RepairSession{cfg}.find_fixes(model);
}

} // namespace nnrepair
