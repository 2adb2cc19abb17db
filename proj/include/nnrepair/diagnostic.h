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

#ifndef NNREPAIR_DIAGNOSTIC_H
#define NNREPAIR_DIAGNOSTIC_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnrepair/shape.h"

namespace nnrepair
{

enum class ErrorKind
{
  DimensionError,
  InputShapeMismatch,
  ArgumentError,
  WeightShapeError,
  WindowOverflow,
};

/// "Dimension Error", "Input Shape Mismatch", ...
std::string_view kind_text(ErrorKind kind);
std::string_view kind_key(ErrorKind kind); // "DimensionError", ...
std::optional<ErrorKind> parse_error_kind(std::string_view key);

/**
 * One observed or expected fact. Rendered as the label followed by the lists
 * joined with " and ", then the number: "Input Shape [1,16]",
 * "Dimensions 3", "Input Shapes [1,2,2] and [1,5,2]", "Equal Shapes".
 */
struct Fact
{
  std::string label;
  std::vector<IntList> lists;
  std::optional<std::int64_t> number;

  bool operator==(const Fact &) const = default;
};

std::string render_fact(const Fact &fact);

struct Diagnostic
{
  ErrorKind kind = ErrorKind::DimensionError;
  std::string layer_id;
  std::size_t location = 0;
  std::vector<Fact> observed;
  std::vector<Fact> expected;
  std::int64_t badness = 0; // always < 0

  std::string message() const;

  bool operator==(const Diagnostic &) const = default;
};

std::int64_t severity_factor(ErrorKind kind);

/// -distance * severity_factor(kind), saturating. distance must be > 0.
std::int64_t compute_badness(ErrorKind kind, std::int64_t distance);

/**
 * Two lines, no trailing newline:
 *   Invalid Model, Badness Value: <badness>
 *   Aborted at <layer>: <kind text>, <observed facts>, Expected <expected facts>!!!
 */
std::string format_diagnostic(const Diagnostic &d);

} // namespace nnrepair

#endif // NNREPAIR_DIAGNOSTIC_H
