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

#include <chrono>
#include <ostream>

#include <CLI11.hpp>

#include "nnrepair/generator.h"
#include "nnrepair/io.h"

namespace nnrepair
{

namespace
{

enum Exit
{
  kOk = 0,
  kInvalid = 1,
  kNoFix = 2,
  kFailure = 3,
};

struct CheckArgs
{
  std::string model;
  std::string format = "text";
};

struct RepairArgs
{
  std::string model;
  std::uint64_t seed = 0;
  int max_fixes = 20;
  int top = 5;
  std::string out_dir;
  std::string emit = "report";
  bool timing = false;
};

struct GenerateArgs
{
  std::uint64_t seed = 0;
  int layers = 0;
  std::string family = "mixed";
  bool graph = false;
  int inject_bugs = 0;
  std::string out_dir;
  int count = 1;
  bool valid = false;
};

struct RenderArgs
{
  std::string model;
  bool shapes = false;
};

std::string dot_with_shapes(const ModelGraph &model)
{
  const auto result = infer_shapes(model);
  return render_dot(model, &result.shapes);
}

int run_check(const CheckArgs &args, std::ostream &out)
{
  const auto model = load_model(std::filesystem::path{args.model});
  const auto result = infer_shapes(model);
  if (args.format == "structured")
  {
    nlohmann::json doc{{"valid", result.ok()}};
    if (result.diagnostic)
      doc["diagnostic"] = diagnostic_to_json(*result.diagnostic);
    else
    {
      nlohmann::json shapes = nlohmann::json::object();
      for (const auto &id : result.order)
        shapes[id] = result.shapes.at(id).dims();
      doc["shapes"] = shapes;
    }
    out << doc.dump(2) << "\n";
  }
  else if (result.diagnostic)
  {
    out << format_diagnostic(*result.diagnostic) << "\n";
  }
  else
  {
    out << "Valid Model\n";
    for (const auto &id : result.order)
      out << id << " " << kind_name(model.find_node(id)->kind) << " " << result.shapes.at(id).to_string() << "\n";
  }
  return result.ok() ? kOk : kInvalid;
}

int run_repair(const RepairArgs &args, std::ostream &out, std::ostream &err)
{
  const auto model = load_model(std::filesystem::path{args.model});
  RepairConfig cfg;
  cfg.seed = args.seed;
  cfg.max_fixes = args.max_fixes;
  cfg.top_k = args.top;

  RepairReport report;
  report.model_name = model.name;
  report.seed = args.seed;
  report.diagnostic = infer_shapes(model).diagnostic;

  const auto start = std::chrono::steady_clock::now();
  try
  {
    report.candidates = find_fixes(cfg, model);
  }
  catch (const NoFix &e)
  {
    if (report.diagnostic)
      out << format_diagnostic(*report.diagnostic) << "\n";
    err << "no fix: " << e.what() << "\n";
    return kNoFix;
  }
  report.elapsed_ms =
    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (args.timing)
    err << "repair took " << report.elapsed_ms << " ms\n";

  const auto report_text = report_to_json(report, args.timing).dump(2) + "\n";
  if (args.out_dir.empty())
  {
    const auto &top = report.candidates.front();
    if (args.emit == "model")
      out << save_model(top.model);
    else if (args.emit == "dot")
      out << dot_with_shapes(top.model);
    else
      out << report_text;
    return kOk;
  }

  const std::filesystem::path dir{args.out_dir};
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < report.candidates.size(); ++i)
  {
    const auto &c = report.candidates[i];
    std::filesystem::path path = dir / candidate_file_name(i + 1);
    if (args.emit == "dot")
    {
      path.replace_extension(".dot");
      write_file_atomic(path, dot_with_shapes(c.model));
    }
    else
    {
      write_file_atomic(path, save_model(c.model));
    }
    out << path.string() << "\n";
  }
  if (args.emit == "report")
  {
    write_file_atomic(dir / "report.json", report_text);
    out << (dir / "report.json").string() << "\n";
  }
  return kOk;
}

int run_generate(const GenerateArgs &args, std::ostream &out, std::ostream &err)
{
  GenConfig cfg;
  if (args.layers > 0)
    cfg.layers_min = cfg.layers_max = args.layers;
  cfg.family = *parse_family(args.family);
  cfg.graph_mode = args.graph;
  cfg.inject_bugs = args.inject_bugs;
  cfg.valid = args.valid;

  if (args.out_dir.empty())
  {
    if (args.count != 1)
    {
      err << "--count above 1 needs --out\n";
      return kFailure;
    }
    cfg.seed = args.seed;
    out << save_model(generate_model(cfg));
    return kOk;
  }
  const std::filesystem::path dir{args.out_dir};
  std::filesystem::create_directories(dir);
  for (int i = 0; i < args.count; ++i)
  {
    cfg.seed = args.seed + static_cast<std::uint64_t>(i);
    const auto path = dir / ("model_" + std::to_string(cfg.seed) + ".json");
    write_file_atomic(path, save_model(generate_model(cfg)));
    out << path.string() << "\n";
  }
  return kOk;
}

int run_render(const RenderArgs &args, std::ostream &out)
{
  const auto model = load_model(std::filesystem::path{args.model});
  if (args.shapes)
  {
    const auto result = infer_shapes(model);
    out << render_dot(model, &result.shapes);
  }
  else
  {
    out << render_dot(model);
  }
  return kOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Shape checker and repairer for neural network models", "nnrepair"};
  app.require_subcommand(1);

  CheckArgs check;
  auto *check_cmd = app.add_subcommand("check", "Run the shape semantics and print shapes or the first violation");
  check_cmd->add_option("model", check.model, "Model file")->required();
  check_cmd->add_option("--format", check.format, "text or structured")
    ->check(CLI::IsMember({"text", "structured"}));

  RepairArgs repair;
  auto *repair_cmd = app.add_subcommand("repair", "Search for ranked fixes");
  repair_cmd->add_option("model", repair.model, "Model file")->required();
  repair_cmd->add_option("--seed", repair.seed, "Random seed");
  repair_cmd->add_option("--max-fixes", repair.max_fixes, "Regeneration rounds")->check(CLI::PositiveNumber);
  repair_cmd->add_option("--top", repair.top, "Number of ranked fixes")->check(CLI::PositiveNumber);
  repair_cmd->add_option("--out", repair.out_dir, "Directory for the emitted files");
  repair_cmd->add_option("--emit", repair.emit, "model, dot or report")
    ->check(CLI::IsMember({"model", "dot", "report"}));
  repair_cmd->add_flag("--timing", repair.timing, "Report wall time");

  GenerateArgs generate;
  auto *generate_cmd = app.add_subcommand("generate", "Emit random models");
  generate_cmd->add_option("--seed", generate.seed, "Random seed");
  generate_cmd->add_option("--layers", generate.layers, "Layer count (default 3..12)")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--family", generate.family, "dense, recurrent, pooling, conv or mixed")
    ->check(CLI::IsMember({"dense", "recurrent", "pooling", "conv", "mixed"}));
  generate_cmd->add_flag("--graph", generate.graph, "Allow merge layers");
  generate_cmd->add_option("--inject-bugs", generate.inject_bugs, "Bugs injected into a valid model")
    ->check(CLI::NonNegativeNumber);
  generate_cmd->add_option("--out", generate.out_dir, "Output directory");
  generate_cmd->add_option("--count", generate.count, "Number of models (seeds seed..seed+count-1)")
    ->check(CLI::PositiveNumber);
  generate_cmd->add_flag("--valid", generate.valid, "Only emit models that pass the checks");

  RenderArgs render;
  auto *render_cmd = app.add_subcommand("render", "Emit Graphviz DOT");
  render_cmd->add_option("model", render.model, "Model file")->required();
  render_cmd->add_flag("--shapes", render.shapes, "Label layers with output shapes");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp &)
  {
    out << app.help();
    return kOk;
  }
  catch (const CLI::ParseError &e)
  {
    err << e.what() << "\n";
    return kFailure;
  }

  try
  {
    if (check_cmd->parsed())
      return run_check(check, out);
    if (repair_cmd->parsed())
      return run_repair(repair, out, err);
    if (generate_cmd->parsed())
      return run_generate(generate, out, err);
    return run_render(render, out);
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

} // namespace nnrepair
