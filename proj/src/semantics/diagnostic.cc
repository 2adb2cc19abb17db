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

#include "nnrepair/diagnostic.h"

#include <limits>
#include <stdexcept>

namespace nnrepair
{

std::string_view kind_text(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::DimensionError:
      return "Dimension Error";
    case ErrorKind::InputShapeMismatch:
      return "Input Shape Mismatch";
    case ErrorKind::ArgumentError:
      return "Argument Error";
    case ErrorKind::WeightShapeError:
      return "Weight Shape Error";
    case ErrorKind::WindowOverflow:
      return "Window Overflow";
  }
  return "Error";
}

std::string_view kind_key(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::DimensionError:
      return "DimensionError";
    case ErrorKind::InputShapeMismatch:
      return "InputShapeMismatch";
    case ErrorKind::ArgumentError:
      return "ArgumentError";
    case ErrorKind::WeightShapeError:
      return "WeightShapeError";
    case ErrorKind::WindowOverflow:
      return "WindowOverflow";
  }
  return "Error";
}

std::optional<ErrorKind> parse_error_kind(std::string_view key)
{
  for (auto k : {ErrorKind::DimensionError, ErrorKind::InputShapeMismatch, ErrorKind::ArgumentError,
                 ErrorKind::WeightShapeError, ErrorKind::WindowOverflow})
    if (kind_key(k) == key)
      return k;
  return std::nullopt;
}

std::string render_fact(const Fact &fact)
{
  std::string out = fact.label;
  for (std::size_t i = 0; i < fact.lists.size(); ++i)
    out += (i ? " and " : " ") + format_list(fact.lists[i]);
  if (fact.number)
    out += " " + std::to_string(*fact.number);
  return out;
}

std::int64_t severity_factor(ErrorKind kind)
{
  switch (kind)
  {
    case ErrorKind::DimensionError:
      return 100000000000000000;
    case ErrorKind::InputShapeMismatch:
      return 10000000000000;
    case ErrorKind::WeightShapeError:
      return 1000000000;
    case ErrorKind::WindowOverflow:
      return 100000;
    case ErrorKind::ArgumentError:
      return 1000;
  }
  return 1;
}

std::int64_t compute_badness(ErrorKind kind, std::int64_t distance)
{
  if (distance <= 0)
    throw std::invalid_argument("badness distance must be positive");
  const std::int64_t factor = severity_factor(kind);
  if (distance > std::numeric_limits<std::int64_t>::max() / factor)
    return std::numeric_limits<std::int64_t>::min() + 1;
  return -distance * factor;
}

std::string Diagnostic::message() const { return format_diagnostic(*this); }

std::string format_diagnostic(const Diagnostic &d)
{
  std::string out = "Invalid Model, Badness Value: " + std::to_string(d.badness) + "\n";
  out += "Aborted at " + d.layer_id + ": " + std::string{kind_text(d.kind)};
  for (const auto &f : d.observed)
    out += ", " + render_fact(f);
  out += ", Expected ";
  for (std::size_t i = 0; i < d.expected.size(); ++i)
    out += (i ? ", " : "") + render_fact(d.expected[i]);
  out += "!!!";
  return out;
}

} // namespace nnrepair
