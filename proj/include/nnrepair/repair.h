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

#ifndef NNREPAIR_REPAIR_H
#define NNREPAIR_REPAIR_H

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnrepair/edit.h"
#include "nnrepair/semantics.h"

namespace nnrepair
{

/// No working fix within the search budget.
class NoFix : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// No fix generator applies to the diagnostic.
class EmptyFixSet : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Inclusive sampling ranges for regenerated arguments.
struct ArgDomains
{
  std::int64_t window_min = 1; // strides, dilation, kernel and pool components
  std::int64_t window_max = 4;
  std::int64_t units_min = 1; // units, filters
  std::int64_t units_max = 16;
  std::int64_t amount_min = 0; // padding and cropping amounts
  std::int64_t amount_max = 3;
  std::vector<std::string> padding = {"valid", "same"};
};

struct RepairConfig
{
  std::uint64_t seed = 0;
  int max_fixes = 20;
  int top_k = 5;
  ArgDomains arg_domains;
  /// Values drawn per argument slot in the first regeneration round.
  int samples_per_slot = 4;
  /// Candidate evaluations shared by one find_fixes or minimal-change call;
  /// the fallback search from the original model gets a fresh allowance.
  std::size_t max_evaluations = 4000;
};

/**
 * A repaired (or partially repaired) model together with the edits that
 * produce it from the original and their summed cost. `trace` lists the
 * diagnostics met on the way, starting with the one that was repaired.
 */
struct FixCandidate
{
  ModelGraph model;
  std::vector<Edit> edits;
  std::int64_t change_value = 0;
  std::vector<Diagnostic> trace;
};

/// ArgChange 1, WeightRegen 1, ReplaceLayer 5, InsertLayer 10, InsertConstInput 10.
std::int64_t edit_cost(const Edit &edit);
std::int64_t change_value(std::span<const Edit> edits);

/// |badness| decreased, or the failing location did not move backwards.
bool is_progress(const Diagnostic &next, const Diagnostic &previous);

/// Counters of one search, for instrumentation and tests.
struct SearchStats
{
  std::size_t evaluations = 0;
  std::size_t working = 0;
  std::int64_t cheapest_working = -1; // -1 until a working candidate is seen
  std::size_t max_depth = 0;
};

/**
 * Stateful repair engine. All randomness comes from one generator seeded
 * with cfg.seed, so a fresh session on the same model gives the same result.
 */
class RepairSession
{
public:
  explicit RepairSession(RepairConfig cfg);

  const RepairConfig &config() const { return _cfg; }
  const SearchStats &stats() const { return _stats; }

  /**
   * Single-step fixes for diag. Candidates come in generator order, then by
   * ascending cost. Round r > 1 only yields new argument samples. Throws
   * EmptyFixSet if nothing applies in round 1.
   */
  std::vector<FixCandidate> error_specific_fixes(const ModelGraph &model, const Diagnostic &diag, int round = 1);

  /// Cheapest working fix found by the recursive search. Throws NoFix.
  FixCandidate find_fix_with_minimal_change(const ModelGraph &model, const Diagnostic &diag);

  /// Ranked fixes, at most cfg.top_k. Throws NoFix.
  std::vector<FixCandidate> find_fixes(const ModelGraph &model);

private:
  struct Context;

  std::vector<FixCandidate> generate(const ModelGraph &model, const ShapeResult &shapes, const Diagnostic &diag,
                                     int round);
  FixCandidate complete(const ModelGraph &origin, FixCandidate start, std::size_t depth_cap,
                        std::optional<std::int64_t> bound = std::nullopt);
  void search(Context &ctx, const FixCandidate &state, std::size_t depth);
  std::optional<Diagnostic> settle(const ModelGraph &origin, FixCandidate &candidate);

  RepairConfig _cfg;
  std::mt19937_64 _rng;
  SearchStats _stats;
  std::size_t _limit = 0; // _stats.evaluations at which searches stop
};

std::vector<FixCandidate> error_specific_fixes(const RepairConfig &cfg, const ModelGraph &model,
                                               const Diagnostic &diag);
FixCandidate find_fix_with_minimal_change(const RepairConfig &cfg, const ModelGraph &model, const Diagnostic &diag);
std::vector<FixCandidate> find_fixes(const RepairConfig &cfg, const ModelGraph &model);

/// Ranking order: change value, edit locations and kinds, then discovery.
bool ranks_before(const FixCandidate &a, std::size_t a_seq, const FixCandidate &b, std::size_t b_seq);

/**
 * Folds repeated ArgChanges of one attribute into a single change (dropping
 * it if the value returns to the original) and keeps only the last
 * WeightRegen of a node, unless a ReplaceLayer of that node sits in between.
 * With `origin`, a change back to the node's effective value there (defaults
 * included) is dropped as well.
 */
std::vector<Edit> normalize_edits(std::vector<Edit> edits, const ModelGraph *origin = nullptr);

} // namespace nnrepair

#endif // NNREPAIR_REPAIR_H
