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

#include "fixes.h"

#include <algorithm>
#include <set>

#include "nnrepair/weights.h"

namespace nnrepair::detail
{

namespace
{

using K = LayerKind;

/// Accumulates the edits of one candidate, applying each as it goes so that
/// fresh ids see earlier insertions.
class Builder
{
public:
  explicit Builder(const ModelGraph &model) : _model(model) {}

  const ModelGraph &model() const { return _model; }

  void add(Edit edit)
  {
    _model = apply_edit(_model, edit);
    _edits.push_back(std::move(edit));
  }

  FixCandidate finish() &&
  {
    FixCandidate c;
    c.change_value = change_value(_edits);
    c.model = std::move(_model);
    c.edits = std::move(_edits);
    return c;
  }

private:
  ModelGraph _model;
  std::vector<Edit> _edits;
};

FixCandidate single(const ModelGraph &model, Edit edit)
{
  Builder b{model};
  b.add(std::move(edit));
  return std::move(b).finish();
}

const LayerNode &failing_node(const FixContext &ctx)
{
  const auto *node = ctx.model.find_node(ctx.diag.layer_id);
  if (!node)
    throw UnknownTarget("diagnostic names unknown layer '" + ctx.diag.layer_id + "'");
  return *node;
}

std::vector<TensorShape> input_shapes(const FixContext &ctx, const LayerNode &node)
{
  std::vector<TensorShape> in;
  for (const auto &src : node.inputs)
    in.push_back(ctx.shapes.shapes.at(src));
  return in;
}

/// Inserts a layer of `kind` with `attrs` on edge `edge` of `before`.
void insert_layer(Builder &b, LayerKind kind, std::map<std::string, AttrValue> attrs, const std::string &before,
                  std::size_t edge, std::vector<std::string> extra_inputs = {})
{
  LayerNode layer;
  layer.kind = kind;
  layer.id = make_node_id(traits(kind).id_prefix, EditKind::InsertLayer, before, b.model());
  layer.attrs = std::move(attrs);
  layer.inputs = std::move(extra_inputs);
  b.add(InsertLayer{std::move(layer), before, edge});
}

void stable_sort_by_cost(std::vector<FixCandidate> &cands)
{
  std::stable_sort(cands.begin(), cands.end(),
                   [](const auto &a, const auto &b) { return a.change_value < b.change_value; });
}

template <typename T> void shuffle_values(std::vector<T> &values, std::mt19937_64 &rng)
{
  std::shuffle(values.begin(), values.end(), rng);
}

std::int64_t draw(std::int64_t lo, std::int64_t hi, std::mt19937_64 &rng)
{
  return std::uniform_int_distribution<std::int64_t>{lo, hi}(rng);
}

// Argument slots: one per scalar component of a regenerable attribute.

struct Slot
{
  std::string attr;
  int component = -1; // -1 for scalar and token attributes
  std::vector<AttrValue> domain;
};

AttrValue current_value(const LayerNode &node, const std::string &attr)
{
  return effective_attr(node, attr).value_or(std::int64_t{0});
}

std::vector<AttrValue> int_range(std::int64_t lo, std::int64_t hi)
{
  std::vector<AttrValue> out;
  for (auto v = lo; v <= hi; ++v)
    out.emplace_back(v);
  return out;
}

std::vector<Slot> argument_slots(const RepairConfig &cfg, const LayerNode &node)
{
  std::vector<Slot> slots;
  const auto &d = cfg.arg_domains;
  for (const auto &spec : attr_specs(node.kind))
  {
    const std::string name{spec.name};
    switch (spec.type)
    {
      case AttrType::Int:
        if (name == "units" || name == "filters")
          slots.push_back({name, -1, int_range(d.units_min, d.units_max)});
        break;
      case AttrType::IntTuple:
      {
        const int len = tuple_length(node.kind, spec);
        if (len <= 0 || name == "target_shape")
          break;
        const bool amount = spec.tuple_length == kPairLength;
        for (int i = 0; i < len; ++i)
          slots.push_back({name, i,
                           amount ? int_range(d.amount_min, d.amount_max) : int_range(d.window_min, d.window_max)});
        break;
      }
      case AttrType::Token:
        if (name == "padding")
        {
          Slot s{name, -1, {}};
          for (const auto &tok : d.padding)
            s.domain.emplace_back(tok);
          slots.push_back(std::move(s));
        }
        break;
      default:
        break;
    }
  }
  return slots;
}

AttrValue slot_value(const AttrValue &whole, const Slot &slot)
{
  if (slot.component < 0)
    return whole;
  return std::get<IntList>(whole)[static_cast<std::size_t>(slot.component)];
}

void set_slot(AttrValue &whole, const Slot &slot, const AttrValue &value)
{
  if (slot.component < 0)
    whole = value;
  else
    std::get<IntList>(whole)[static_cast<std::size_t>(slot.component)] = std::get<std::int64_t>(value);
}

std::optional<AttrValue> old_value(const LayerNode &node, const std::string &attr)
{
  if (const auto *v = node.attr(attr))
    return *v;
  return std::nullopt;
}

/// Candidate that sets the given slots of node to new values.
FixCandidate slot_candidate(const ModelGraph &model, const LayerNode &node,
                            const std::vector<std::pair<const Slot *, AttrValue>> &changes)
{
  std::map<std::string, AttrValue> updated;
  for (const auto &[slot, value] : changes)
  {
    auto it = updated.find(slot->attr);
    if (it == updated.end())
      it = updated.emplace(slot->attr, current_value(node, slot->attr)).first;
    set_slot(it->second, *slot, value);
  }
  Builder b{model};
  for (auto &[attr, value] : updated)
    b.add(ArgChange{node.id, attr, old_value(node, attr), value});
  return std::move(b).finish();
}

std::vector<FixCandidate> resample_slots(const FixContext &ctx, const LayerNode &node)
{
  std::vector<FixCandidate> out;
  const auto slots = argument_slots(ctx.cfg, node);
  if (slots.empty())
    return out;

  std::vector<std::vector<AttrValue>> alternatives;
  for (const auto &slot : slots)
  {
    const auto current = slot_value(current_value(node, slot.attr), slot);
    auto &values = alternatives.emplace_back();
    for (const auto &v : slot.domain)
      if (v != current)
        values.push_back(v);
  }

  if (ctx.round == 1)
  {
    for (std::size_t i = 0; i < slots.size(); ++i)
    {
      const auto &slot = slots[i];
      auto values = alternatives[i];
      shuffle_values(values, ctx.rng);
      values.resize(std::min<std::size_t>(values.size(), static_cast<std::size_t>(ctx.cfg.samples_per_slot)));
      for (const auto &v : values)
        out.push_back(slot_candidate(ctx.model, node, {{&slot, v}}));
    }
    return out;
  }

  const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(ctx.round), slots.size());
  std::set<std::string> seen;
  const int samples = 2 * ctx.cfg.samples_per_slot;
  for (int s = 0; s < samples; ++s)
  {
    std::vector<std::size_t> picks(slots.size());
    for (std::size_t i = 0; i < picks.size(); ++i)
      picks[i] = i;
    shuffle_values(picks, ctx.rng);
    picks.resize(r);
    std::sort(picks.begin(), picks.end());

    std::vector<std::pair<const Slot *, AttrValue>> changes;
    for (auto i : picks)
    {
      const auto &slot = slots[i];
      const auto &values = alternatives[i];
      if (values.empty())
        continue;
      changes.emplace_back(&slot, values[static_cast<std::size_t>(
                                    draw(0, static_cast<std::int64_t>(values.size()) - 1, ctx.rng))]);
    }
    if (changes.empty())
      continue;
    auto cand = slot_candidate(ctx.model, node, changes);
    std::string key;
    for (const auto &e : cand.edits)
      key += describe_edit(e) + ";";
    if (seen.insert(key).second)
      out.push_back(std::move(cand));
  }
  return out;
}

} // namespace

IntList reshape_to_rank(const IntList &dims, std::size_t rank)
{
  const std::size_t want = rank - 1;
  IntList out = dims;
  if (out.size() < want)
  {
    out.resize(want, 1);
    return out;
  }
  if (out.size() > want && want >= 1)
  {
    const auto tail = product(IntList(out.begin() + static_cast<std::ptrdiff_t>(want - 1), out.end()));
    out.resize(want - 1);
    out.push_back(tail);
  }
  return out;
}

LayerNode adapt_layer(const LayerNode &node, LayerKind kind, const TensorShape &in, std::mt19937_64 &rng)
{
  LayerNode out;
  out.id = node.id;
  out.kind = kind;
  out.inputs = node.inputs;
  for (const auto &spec : attr_specs(kind))
  {
    const auto *value = node.attr(spec.name);
    if (!value)
      continue;
    AttrValue v = *value;
    const int len = tuple_length(kind, spec);
    if (len > 0 && std::holds_alternative<IntList>(v))
    {
      auto &list = std::get<IntList>(v);
      list.resize(static_cast<std::size_t>(len), spec.tuple_length == kPairLength ? 0 : 1);
    }
    out.attrs.emplace(std::string{spec.name}, std::move(v));
  }
  if (traits(kind).has_weights && node.weights)
    out.weights = random_weights(out, in, rng, node.weights->bias.has_value());
  return out;
}

std::vector<FixCandidate> fix_dimension_error(const FixContext &ctx)
{
  std::vector<FixCandidate> out;
  if (ctx.round > 1)
    return out;
  const auto &node = failing_node(ctx);
  const auto in = ctx.shapes.shapes.at(node.inputs.at(0));
  const auto req = required_rank(node.kind);
  if (!req)
    return out;

  const auto rank = static_cast<int>(in.rank());
  if (rank >= 3 && rank <= 5)
  {
    if (auto variant = family_variant(node.kind, rank - 2); variant && *variant != node.kind)
    {
      auto replacement = adapt_layer(node, *variant, in, ctx.rng);
      replacement.inputs.clear();
      out.push_back(single(ctx.model, ReplaceLayer{node.id, std::move(replacement)}));
    }
  }

  // Rank >= req->rank only fails exact requirements.
  const auto target = reshape_to_rank(in.without_batch(), req->rank);
  if (!target.empty() && target != in.without_batch())
  {
    Builder b{ctx.model};
    insert_layer(b, K::Reshape, {{"target_shape", target}}, node.id, 0);
    out.push_back(std::move(b).finish());
  }
  stable_sort_by_cost(out);
  return out;
}

std::vector<FixCandidate> fix_input_shape(const FixContext &ctx)
{
  std::vector<FixCandidate> out;
  if (ctx.round > 1)
    return out;
  const auto &node = failing_node(ctx);
  const auto in = input_shapes(ctx, node);
  const auto &ref = in[0];
  const bool same_rank =
    std::all_of(in.begin(), in.end(), [&](const auto &s) { return s.rank() == ref.rank(); });

  std::optional<std::size_t> axis;
  if (node.kind == K::Concatenate && same_rank)
  {
    auto a = node.int_attr("axis", -1);
    if (a < 0)
      a += static_cast<std::int64_t>(ref.rank());
    axis = static_cast<std::size_t>(a);
  }
  auto differs = [&](const TensorShape &s) {
    if (s.rank() != ref.rank())
      return true;
    for (std::size_t i = 1; i < s.rank(); ++i)
      if (i != axis && s[i] != ref[i])
        return true;
    return false;
  };
  std::size_t j = 1;
  while (j < in.size() && !differs(in[j]))
    ++j;
  if (j == in.size())
    return out;
  const auto &other = in[j];

  // Concatenate: match the other input everywhere except the concat axis.
  if (node.kind == K::Concatenate)
  {
    const auto concat_target = [&](const TensorShape &shape, const TensorShape &like) -> std::optional<IntList> {
      auto a = node.int_attr("axis", -1);
      if (a < 0)
        a += static_cast<std::int64_t>(like.rank());
      if (a < 1 || a >= static_cast<std::int64_t>(like.rank()))
        return std::nullopt;
      const auto rest = like.elements() / like[static_cast<std::size_t>(a)];
      if (shape.elements() % rest != 0)
        return std::nullopt;
      IntList target = like.without_batch();
      target[static_cast<std::size_t>(a) - 1] = shape.elements() / rest;
      if (TensorShape::batched(target) == shape)
        return std::nullopt;
      return target;
    };
    if (auto t = concat_target(other, ref))
    {
      Builder b{ctx.model};
      insert_layer(b, K::Reshape, {{"target_shape", *t}}, node.id, j);
      out.push_back(std::move(b).finish());
    }
    if (in.size() == 2)
      if (auto t = concat_target(ref, other))
      {
        Builder b{ctx.model};
        insert_layer(b, K::Reshape, {{"target_shape", *t}}, node.id, 0);
        out.push_back(std::move(b).finish());
      }
  }

  // Reshape when the element counts allow it, otherwise towards the rank.
  if (!axis)
  {
    if (other.elements() == ref.elements())
    {
      Builder b{ctx.model};
      insert_layer(b, K::Reshape, {{"target_shape", ref.without_batch()}}, node.id, j);
      out.push_back(std::move(b).finish());
      if (in.size() == 2)
      {
        Builder b0{ctx.model};
        insert_layer(b0, K::Reshape, {{"target_shape", other.without_batch()}}, node.id, 0);
        out.push_back(std::move(b0).finish());
      }
    }
    else if (other.rank() != ref.rank())
    {
      Builder b{ctx.model};
      insert_layer(b, K::Reshape, {{"target_shape", reshape_to_rank(other.without_batch(), ref.rank())}}, node.id,
                   j);
      out.push_back(std::move(b).finish());
    }
  }
  if (!same_rank && in.size() == 2)
  {
    // The odd input may also be input 0.
    if (other.elements() != ref.elements())
    {
      Builder b{ctx.model};
      insert_layer(b, K::Reshape, {{"target_shape", reshape_to_rank(ref.without_batch(), other.rank())}}, node.id,
                   0);
      out.push_back(std::move(b).finish());
    }
  }

  if (other.rank() == ref.rank())
  {
    const std::size_t rank = ref.rank();
    if (rank >= 3 && rank <= 5)
    {
      const std::size_t n = rank - 2;
      IntList pad_other(2 * n, 0), pad_ref(2 * n, 0);
      bool need_other = false, need_ref = false;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (i + 1 == axis)
          continue;
        const auto diff = ref[i + 1] - other[i + 1];
        auto &pad = diff > 0 ? pad_other : pad_ref;
        const auto amount = std::llabs(diff);
        pad[2 * i] = (amount + 1) / 2;
        pad[2 * i + 1] = amount / 2;
        (diff > 0 ? need_other : need_ref) |= amount > 0;
      }
      if (need_other || need_ref)
      {
        const auto kind = *family_variant(K::ZeroPadding1D, static_cast<int>(n));
        Builder b{ctx.model};
        if (need_other)
          insert_layer(b, kind, {{"padding", pad_other}}, node.id, j);
        if (need_ref)
          insert_layer(b, kind, {{"padding", pad_ref}}, node.id, 0);
        out.push_back(std::move(b).finish());
      }
    }

    // Extend the deficient side with a zero constant along one axis.
    for (std::size_t ax = 1; ax < rank; ++ax)
    {
      if (ax == axis || ref[ax] == other[ax])
        continue;
      const bool grow_other = other[ax] < ref[ax];
      const auto &small = grow_other ? other : ref;
      IntList const_dims = small.dims();
      const_dims[ax] = std::llabs(ref[ax] - other[ax]);
      Builder b{ctx.model};
      const auto const_id = make_node_id("Cst", EditKind::InsertConstInput, node.id, b.model());
      b.add(InsertConstInput{const_id, TensorShape{const_dims}, 0.0});
      insert_layer(b, K::Concatenate, {{"axis", static_cast<std::int64_t>(ax)}}, node.id, grow_other ? j : 0,
                   {const_id});
      out.push_back(std::move(b).finish());
    }
  }
  stable_sort_by_cost(out);
  return out;
}

std::vector<FixCandidate> fix_argument_error(const FixContext &ctx)
{
  const auto &node = failing_node(ctx);
  std::vector<FixCandidate> out;

  if (node.kind == K::Reshape)
  {
    if (ctx.round > 1)
      return out;
    const auto in = ctx.shapes.shapes.at(node.inputs.at(0)).without_batch();
    const auto count = product(in);
    const auto current = node.tuple_attr("target_shape", {});
    std::vector<IntList> targets;
    if (!current.empty())
    {
      IntList last = current;
      const auto head = product(IntList(current.begin(), current.end() - 1));
      if (count % head == 0)
      {
        last.back() = count / head;
        targets.push_back(last);
      }
      IntList first = current;
      const auto tail = product(IntList(current.begin() + 1, current.end()));
      if (count % tail == 0)
      {
        first.front() = count / tail;
        targets.push_back(first);
      }
    }
    targets.push_back(in);
    targets.push_back({count});
    std::set<IntList> seen{current};
    for (const auto &t : targets)
      if (seen.insert(t).second)
        out.push_back(single(ctx.model, ArgChange{node.id, "target_shape", old_value(node, "target_shape"), t}));
    return out;
  }

  if (node.kind == K::Concatenate)
  {
    if (ctx.round > 1)
      return out;
    const auto rank = static_cast<std::int64_t>(ctx.shapes.shapes.at(node.inputs.at(0)).rank());
    for (std::int64_t a = 1; a < rank; ++a)
      out.push_back(single(ctx.model, ArgChange{node.id, "axis", old_value(node, "axis"), a}));
    return out;
  }

  return resample_slots(ctx, node);
}

std::vector<FixCandidate> fix_weight_shape(const FixContext &ctx)
{
  std::vector<FixCandidate> out;
  if (ctx.round > 1)
    return out;
  const auto &node = failing_node(ctx);
  const auto in = ctx.shapes.shapes.at(node.inputs.at(0));
  const bool with_bias = node.weights && node.weights->bias.has_value();
  out.push_back(single(ctx.model, WeightRegen{node.id, random_weights(node, in, ctx.rng, with_bias)}));
  return out;
}

std::vector<FixCandidate> fix_window_overflow(const FixContext &ctx)
{
  constexpr std::size_t kMaxWindowSamples = 64;
  const auto &node = failing_node(ctx);
  const auto in = ctx.shapes.shapes.at(node.inputs.at(0));
  const auto &t = traits(node.kind);
  const auto n = static_cast<std::size_t>(t.spatial_rank);
  std::vector<FixCandidate> out;

  if (t.family == LayerFamily::Cropping)
  {
    const auto crop = node.tuple_attr("cropping", IntList(2 * n, 0));
    std::set<IntList> seen{crop};
    auto push = [&](const IntList &c) {
      if (seen.insert(c).second)
        out.push_back(single(ctx.model, ArgChange{node.id, "cropping", old_value(node, "cropping"), c}));
    };
    if (ctx.round == 1)
    {
      IntList clamped = crop;
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto room = in[i + 1] - 1;
        if (crop[2 * i] + crop[2 * i + 1] <= room)
          continue;
        clamped[2 * i] = std::min(crop[2 * i], room);
        clamped[2 * i + 1] = room - clamped[2 * i];
      }
      push(clamped);
      // One amount changed, nearest to the current value first.
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto room = in[i + 1] - 1;
        if (crop[2 * i] + crop[2 * i + 1] <= room)
          continue;
        for (std::size_t side = 0; side < 2; ++side)
        {
          const auto other = crop[2 * i + 1 - side];
          for (auto v = room - other; v >= 0; --v)
          {
            IntList c = crop;
            c[2 * i + side] = v;
            push(c);
          }
        }
      }
    }
    const auto &d = ctx.cfg.arg_domains;
    for (int s = 0; s < ctx.cfg.samples_per_slot; ++s)
    {
      IntList c = crop;
      for (std::size_t i = 0; i < n; ++i)
      {
        const auto room = in[i + 1] - 1;
        if (crop[2 * i] + crop[2 * i + 1] <= room)
          continue;
        c[2 * i] = draw(std::min(d.amount_min, room), std::min(d.amount_max, room), ctx.rng);
        const auto rest = room - c[2 * i];
        c[2 * i + 1] = draw(std::min(d.amount_min, rest), std::min(d.amount_max, rest), ctx.rng);
      }
      push(c);
    }
    return out;
  }

  const auto p = window_params(node);
  const std::string attr = t.family == LayerFamily::Conv ? "kernel_size" : "pool_size";
  std::vector<std::size_t> axes;
  IntList limit;
  std::size_t space = 1;
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto dim = in[i + 1];
    const auto max_window = (dim - 1) / p.dilation[i] + 1;
    if (p.dilation[i] * (p.window[i] - 1) + 1 > dim)
    {
      axes.push_back(i);
      limit.push_back(max_window);
      space *= static_cast<std::size_t>(max_window);
    }
  }

  std::vector<IntList> windows;
  if (space <= kMaxWindowSamples)
  {
    if (ctx.round == 1)
    {
      IntList idx(axes.size(), 1);
      for (std::size_t k = 0; k < space; ++k)
      {
        IntList w = p.window;
        std::size_t rest = k;
        for (std::size_t a = 0; a < axes.size(); ++a)
        {
          w[axes[a]] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(limit[a])) + 1;
          rest /= static_cast<std::size_t>(limit[a]);
        }
        windows.push_back(std::move(w));
      }
      shuffle_values(windows, ctx.rng);
    }
  }
  else
  {
    std::set<IntList> seen;
    for (std::size_t s = 0; s < kMaxWindowSamples * 4 && windows.size() < kMaxWindowSamples; ++s)
    {
      IntList w = p.window;
      for (std::size_t a = 0; a < axes.size(); ++a)
        w[axes[a]] = draw(1, limit[a], ctx.rng);
      if (seen.insert(w).second)
        windows.push_back(std::move(w));
    }
  }
  for (const auto &w : windows)
    out.push_back(single(ctx.model, ArgChange{node.id, attr, old_value(node, attr), w}));

  if (ctx.round == 1 && !p.same)
    out.push_back(single(ctx.model, ArgChange{node.id, "padding", old_value(node, "padding"), std::string{"same"}}));
  return out;
}

} // namespace nnrepair::detail
