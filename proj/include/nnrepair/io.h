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

#ifndef NNREPAIR_IO_H
#define NNREPAIR_IO_H

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nnrepair/repair.h"

namespace nnrepair
{

/// Malformed document. what() starts with the path of the offending element.
class ParseError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Well-formed document that does not describe a valid model.
class SchemaError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/**
 * Model documents:
 *   {"name": "...",
 *    "inputs":  [{"id": "in0", "shape": [10], "const": 0.0?}],
 *    "layers":  [{"id": "...", "kind": "Conv1D", "attrs": {...},
 *                 "weights": {"kernel": [[...]], "bias": [...]}?, "inputs": ["..."]}],
 *    "outputs": ["..."]}
 * Shapes exclude the batch axis. Tuple attributes accept a scalar, one value
 * per axis, or for paddings and croppings also flat or nested (left, right)
 * pairs. "kernel_shape"/"bias_shape" may state the expected nesting.
 */
ModelGraph model_from_json(const nlohmann::json &doc);
nlohmann::json model_to_json(const ModelGraph &model);

ModelGraph load_model(std::istream &in);
ModelGraph load_model(const std::filesystem::path &path);

/// Canonical text: sorted keys, two-space indent, trailing newline.
std::string save_model(const ModelGraph &model);

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path &path, const std::string &text);

/// Graphviz digraph with one box per layer and one edge per layer input.
std::string render_dot(const ModelGraph &model, const ShapeMap *shapes = nullptr);

/// Informational layer-per-line listing.
std::string render_pseudocode(const ModelGraph &model);

nlohmann::json edit_to_json(const Edit &edit);
nlohmann::json diagnostic_to_json(const Diagnostic &diag);

struct RepairReport
{
  std::string model_name;
  std::uint64_t seed = 0;
  std::optional<Diagnostic> diagnostic; // empty for a valid model
  std::vector<FixCandidate> candidates; // in find_fixes order
  double elapsed_ms = 0.0;
};

/// File name under which candidate `rank` (1-based) is emitted.
std::string candidate_file_name(std::size_t rank);

/// Timing is left out unless asked for, so reports are reproducible.
nlohmann::json report_to_json(const RepairReport &report, bool include_timing = false);
std::string render_report_text(const RepairReport &report);

/// Command-line entry point. Returns the exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace nnrepair

#endif // NNREPAIR_IO_H
