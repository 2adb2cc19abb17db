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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.h"

using namespace nnrepair;
using namespace nnrepair::test;
using nlohmann::json;

namespace
{

const char *const kFixtures[] = {"dense_conv.json",   "dense_conv_fixed.json",  "pool_rank.json",      "concat_branches.json",
                                 "cropping1d.json", "maxpool2d.json", "subtract_cascade.json"};

std::string fixture_path(const std::string &name) { return std::string{NNREPAIR_FIXTURES} + "/" + name; }

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "nnrepair");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

ModelGraph parse(const std::string &text)
{
  std::istringstream in{text};
  return load_model(in);
}

std::filesystem::path scratch_dir()
{
  const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() /
             (std::string{"nnrepair_"} + info->test_suite_name() + "_" + info->name());
  std::filesystem::remove_all(dir);
  return dir;
}

std::string read_file(const std::filesystem::path &path)
{
  std::ifstream in{path};
  return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

std::size_t count_of(const std::string &text, const std::string &needle)
{
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

const char *const kDenseDoc = R"({
  "name": "d",
  "inputs": [{"id": "x", "shape": [2]}],
  "layers": [{"id": "D", "kind": "Dense", "attrs": {"units": 1},
              "weights": {"kernel": [[1.5], [2]], "bias": [0.25]}, "inputs": ["x"]}],
  "outputs": ["D"]
})";

} // namespace

TEST(LoadModel, DenseConvIsSixNodeChain)
{
  const auto m = load_fixture("dense_conv.json");
  ASSERT_EQ(m.nodes.size(), 6u);
  EXPECT_EQ(m.inputs.at(0).shape.dims(), (IntList{1, 10}));
  for (std::size_t i = 1; i < m.nodes.size(); ++i)
    EXPECT_EQ(m.nodes[i].inputs, std::vector<std::string>{m.nodes[i - 1].id});
  EXPECT_EQ(m.outputs, std::vector<std::string>{"Den25740"});
}

TEST(LoadModel, WeightsAndTupleForms)
{
  const auto m = parse(kDenseDoc);
  const auto &w = *m.find_node("D")->weights;
  EXPECT_EQ(w.kernel->shape, (IntList{2, 1}));
  EXPECT_EQ(w.kernel->values, (std::vector<double>{1.5, 2}));
  EXPECT_EQ(w.bias->values, std::vector<double>{0.25});

  const auto crop = parse(R"({"name": "c", "inputs": [{"id": "x", "shape": [6, 6, 1]}],
    "layers": [{"id": "C", "kind": "Cropping2D", "attrs": {"cropping": [[1, 2], [0, 1]]}, "inputs": ["x"]},
               {"id": "P", "kind": "ZeroPadding2D", "attrs": {"padding": 1}, "inputs": ["C"]}],
    "outputs": ["P"]})");
  EXPECT_EQ(crop.find_node("C")->tuple_attr("cropping", {}), (IntList{1, 2, 0, 1}));
  EXPECT_EQ(crop.find_node("P")->tuple_attr("padding", {}), (IntList{1, 1, 1, 1}));
}

TEST(LoadModel, UnknownKindIsSchemaError)
{
  try
  {
    parse(R"({"name": "u", "inputs": [{"id": "x", "shape": [2]}],
      "layers": [{"id": "L", "kind": "Frobnicate", "inputs": ["x"]}], "outputs": ["L"]})");
    FAIL() << "expected SchemaError";
  }
  catch (const SchemaError &e)
  {
    const std::string what = e.what();
    EXPECT_NE(what.find("Frobnicate"), std::string::npos) << what;
    EXPECT_EQ(what.rfind("$.layers[0]", 0), 0u) << what;
  }
}

TEST(LoadModel, RaggedWeightsAreSchemaError)
{
  std::string doc = kDenseDoc;
  doc.replace(doc.find("[[1.5], [2]]"), 12, "[[1.5], [2, 3]]");
  EXPECT_THROW(parse(doc), SchemaError);
  doc = kDenseDoc;
  doc.replace(doc.find("\"kernel\""), 8, "\"kernel_shape\": [3, 1], \"kernel\"");
  EXPECT_THROW(parse(doc), SchemaError);
}

TEST(LoadModel, SchemaViolations)
{
  const char *const docs[] = {
      // missing required attribute
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "D", "kind": "Dense", "inputs": ["x"]}], "outputs": ["D"]})",
      // unknown attribute
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "R", "kind": "ReLU", "attrs": {"units": 2}, "inputs": ["x"]}], "outputs": ["R"]})",
      // non-positive dimension
      R"({"name": "a", "inputs": [{"id": "x", "shape": [0]}], "layers": [{"id": "R", "kind": "ReLU", "inputs": ["x"]}], "outputs": ["R"]})",
      // dangling edge
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "R", "kind": "ReLU", "inputs": ["y"]}], "outputs": ["R"]})",
      // merge with one input
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "A", "kind": "Add", "inputs": ["x"]}], "outputs": ["A"]})",
      // cycle
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "A", "kind": "Add", "inputs": ["x", "B"]}, {"id": "B", "kind": "ReLU", "inputs": ["A"]}], "outputs": ["B"]})",
      // weights on a weightless layer
      R"({"name": "a", "inputs": [{"id": "x", "shape": [2]}], "layers": [{"id": "R", "kind": "ReLU", "weights": {"kernel": [1]}, "inputs": ["x"]}], "outputs": ["R"]})",
      // not an object
      R"([1, 2, 3])",
  };
  for (const auto *doc : docs)
    EXPECT_THROW(parse(doc), SchemaError) << doc;
}

TEST(LoadModel, MalformedIsParseError)
{
  EXPECT_THROW(parse("{\"name\": "), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(SaveModel, StripsBatchAndIsCanonical)
{
  const auto m = load_fixture("dense_conv.json");
  const auto text = save_model(m);
  EXPECT_EQ(json::parse(text)["inputs"][0]["shape"], json::array({10}));
  EXPECT_EQ(text, save_model(m));
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(save_model(load_fixture("dense_conv.json")), text);
}

TEST(SaveModel, RoundTripFixtures)
{
  for (const auto *name : kFixtures)
  {
    const auto m = load_fixture(name);
    const auto text = save_model(m);
    const auto back = parse(text);
    EXPECT_TRUE(structurally_equal(m, back)) << name;
    EXPECT_EQ(save_model(back), text) << name;
  }
}

TEST(SaveModel, RoundTripKeepsWeightValues)
{
  const auto m = parse(kDenseDoc);
  const auto back = parse(save_model(m));
  EXPECT_TRUE(same_weights(m.find_node("D")->weights, back.find_node("D")->weights));
}

TEST(SaveModel, RoundTripGeneratedModels)
{
  for (std::uint64_t seed = 1; seed <= 150; ++seed)
  {
    GenConfig g = fuzz_config(seed);
    g.inject_bugs = static_cast<int>(seed % 3);
    g.valid = seed % 5 == 0;
    const auto m = generate_model(g);
    const auto text = save_model(m);
    const auto back = parse(text);
    ASSERT_TRUE(structurally_equal(m, back)) << "seed " << seed;
    EXPECT_EQ(save_model(back), text) << "seed " << seed;
    for (const auto &n : m.nodes)
      EXPECT_TRUE(same_weights(n.weights, back.find_node(n.id)->weights)) << "seed " << seed << " " << n.id;
  }
}

TEST(SaveModel, RoundTripRepairedModels)
{
  const auto m = load_fixture("concat_branches.json");
  for (const auto &c : find_fixes(RepairConfig{}, m))
  {
    const auto back = parse(save_model(c.model));
    EXPECT_TRUE(structurally_equal(c.model, back));
    EXPECT_TRUE(infer_shapes(back).ok());
  }
}

TEST(WriteFileAtomic, WritesWholeText)
{
  const auto dir = scratch_dir();
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.txt", "first\n");
  write_file_atomic(dir / "a.txt", "second\n");
  EXPECT_EQ(read_file(dir / "a.txt"), "second\n");
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator{dir}, std::filesystem::directory_iterator{}), 1);
  std::filesystem::remove_all(dir);
}

TEST(RenderDot, Examples)
{
  ModelGraph chain;
  chain.name = "chain";
  chain.inputs.push_back({"x", TensorShape::batched({3}), std::nullopt});
  chain.nodes = {make_node("A", LayerKind::ReLU, {"x"}), make_node("B", LayerKind::Softmax, {"A"})};
  chain.outputs = {"B"};
  const auto dot = render_dot(chain);
  EXPECT_EQ(dot.rfind("digraph", 0), 0u);
  EXPECT_EQ(count_of(dot, "->"), 1u);
  EXPECT_NE(dot.find("\"A\" -> \"B\""), std::string::npos);

  const auto branches = load_fixture("concat_branches.json");
  const auto text = render_dot(branches);
  EXPECT_EQ(count_of(text, "[label="), 3u);
  EXPECT_EQ(count_of(text, "->"), 2u);
  EXPECT_NE(text.find("\"R1\" -> \"A\""), std::string::npos);
  EXPECT_NE(text.find("\"R2\" -> \"A\""), std::string::npos);
  EXPECT_EQ(text, render_dot(load_fixture("concat_branches.json")));
}

TEST(RenderDot, ShapeLabels)
{
  const auto m = load_fixture("dense_conv_fixed.json");
  const auto shapes = infer_shapes(m).shapes;
  const auto dot = render_dot(m, &shapes);
  EXPECT_NE(dot.find("\"Res00001\" [label=\"Res00001\\nReshape\\nout:[1,16,1]\"]"), std::string::npos) << dot;
  EXPECT_NE(dot.find("out:[1,5,16]"), std::string::npos);
}

TEST(RenderPseudocode, OneLinePerLayer)
{
  const auto m = load_fixture("dense_conv_fixed.json");
  const auto code = render_pseudocode(m);
  EXPECT_EQ(count_of(code, "\n"), m.nodes.size() + m.inputs.size() + 1);
  EXPECT_NE(code.find("Reshape(target_shape=(16,1))(Den79959)"), std::string::npos) << code;
  EXPECT_NE(code.find("kernel_size=(2,)"), std::string::npos) << code;
}

TEST(Report, FollowsFindFixesOrder)
{
  const auto m = load_fixture("concat_branches.json");
  RepairReport rep;
  rep.model_name = m.name;
  rep.seed = 3;
  rep.diagnostic = infer_shapes(m).diagnostic;
  RepairConfig cfg;
  cfg.seed = 3;
  rep.candidates = find_fixes(cfg, m);
  rep.elapsed_ms = 12.5;
  const auto doc = report_to_json(rep);
  EXPECT_FALSE(doc.contains("timing_ms"));
  EXPECT_EQ(report_to_json(rep, true)["timing_ms"], 12.5);
  EXPECT_EQ(doc["seed"], 3);
  EXPECT_EQ(doc["diagnostic"]["message"], rep.diagnostic->message());
  ASSERT_EQ(doc["candidates"].size(), rep.candidates.size());
  for (std::size_t i = 0; i < rep.candidates.size(); ++i)
  {
    const auto &c = doc["candidates"][i];
    EXPECT_EQ(c["rank"], i + 1);
    EXPECT_EQ(c["change_value"], rep.candidates[i].change_value);
    EXPECT_EQ(c["model_ref"], candidate_file_name(i + 1));
    ASSERT_EQ(c["edits"].size(), rep.candidates[i].edits.size());
    for (std::size_t j = 0; j < rep.candidates[i].edits.size(); ++j)
      EXPECT_EQ(c["edits"][j]["text"], describe_edit(rep.candidates[i].edits[j]));
  }
  const auto text = render_report_text(rep);
  EXPECT_EQ(text.rfind(rep.diagnostic->message(), 0), 0u);
  EXPECT_EQ(count_of(text, "\nFix "), rep.candidates.size());
}

TEST(Cli, CheckDenseConv)
{
  const auto r = cli({"check", fixture_path("dense_conv.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "Invalid Model, Badness Value: -100000000000000000\n"
                   "Aborted at Con60545: Dimension Error, Input Shape [1,16], Expected Dimensions 3!!!\n");
}

TEST(Cli, CheckValidModelPrintsShapes)
{
  const auto r = cli({"check", fixture_path("dense_conv_fixed.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("Valid Model\n", 0), 0u);
  EXPECT_NE(r.out.find("Max46787 MaxPooling1D [1,5,16]\n"), std::string::npos) << r.out;
  EXPECT_EQ(count_of(r.out, "\n"), 8u);

  const auto s = cli({"check", fixture_path("dense_conv_fixed.json"), "--format", "structured"});
  EXPECT_EQ(s.code, 0);
  const auto doc = json::parse(s.out);
  EXPECT_TRUE(doc["valid"]);
  EXPECT_EQ(doc["shapes"]["Den25740"], json::array({1, 1}));

  const auto bad = cli({"check", fixture_path("concat_branches.json"), "--format", "structured"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(json::parse(bad.out)["diagnostic"]["kind"], "InputShapeMismatch");
}

TEST(Cli, RepairDenseConvTopFix)
{
  const auto r = cli({"repair", fixture_path("dense_conv.json"), "--seed", "7", "--top", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  ASSERT_EQ(doc["candidates"].size(), 1u);
  const auto &edit = doc["candidates"][0]["edits"][0];
  EXPECT_EQ(edit["type"], "InsertLayer");
  EXPECT_EQ(edit["before"], "Con60545");
  EXPECT_EQ(edit["layer"]["kind"], "Reshape");
  EXPECT_EQ(edit["layer"]["attrs"]["target_shape"], json::array({16, 1}));
  EXPECT_EQ(doc["candidates"][0]["change_value"], 10);
  EXPECT_EQ(r.out, cli({"repair", fixture_path("dense_conv.json"), "--seed", "7", "--top", "1"}).out);
}

TEST(Cli, RepairEmitsModelAndDot)
{
  const auto model = cli({"repair", fixture_path("concat_branches.json"), "--emit", "model"});
  ASSERT_EQ(model.code, 0);
  EXPECT_TRUE(infer_shapes(parse(model.out)).ok());
  const auto dot = cli({"repair", fixture_path("concat_branches.json"), "--emit", "dot"});
  ASSERT_EQ(dot.code, 0);
  EXPECT_EQ(dot.out.rfind("digraph", 0), 0u);
  EXPECT_NE(dot.out.find("ZeroPadding1D"), std::string::npos);
}

TEST(Cli, RepairWritesCandidateFiles)
{
  const auto dir = scratch_dir();
  const auto r = cli({"repair", fixture_path("concat_branches.json"), "--top", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = json::parse(read_file(dir / "report.json"));
  const auto n = report["candidates"].size();
  ASSERT_GE(n, 1u);
  ASSERT_LE(n, 3u);
  EXPECT_EQ(count_of(r.out, "\n"), n + 1);
  for (std::size_t i = 1; i <= n; ++i)
    EXPECT_TRUE(infer_shapes(load_model(dir / candidate_file_name(i))).ok());
  std::filesystem::remove_all(dir);
}

TEST(Cli, ValidModelRepairIsEmpty)
{
  const auto r = cli({"repair", fixture_path("dense_conv_fixed.json")});
  ASSERT_EQ(r.code, 0);
  const auto doc = json::parse(r.out);
  EXPECT_TRUE(doc["valid"]);
  ASSERT_EQ(doc["candidates"].size(), 1u);
  EXPECT_EQ(doc["candidates"][0]["change_value"], 0);
  EXPECT_TRUE(doc["candidates"][0]["edits"].empty());
}

TEST(Cli, GenerateIsDeterministic)
{
  const auto a = cli({"generate", "--seed", "5", "--layers", "4", "--family", "conv"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, cli({"generate", "--seed", "5", "--layers", "4", "--family", "conv"}).out);
  EXPECT_EQ(parse(a.out).nodes.size(), 4u);

  const auto bugged = cli({"generate", "--seed", "5", "--graph", "--inject-bugs", "2"});
  ASSERT_EQ(bugged.code, 0);
  EXPECT_FALSE(infer_shapes(parse(bugged.out)).ok());

  const auto dir = scratch_dir();
  const auto many = cli({"generate", "--seed", "10", "--count", "3", "--valid", "--out", dir.string()});
  ASSERT_EQ(many.code, 0);
  for (int seed = 10; seed < 13; ++seed)
    EXPECT_TRUE(infer_shapes(load_model(dir / ("model_" + std::to_string(seed) + ".json"))).ok());
  std::filesystem::remove_all(dir);
}

TEST(Cli, RenderMatchesLibrary)
{
  const auto m = load_fixture("concat_branches.json");
  const auto r = cli({"render", fixture_path("concat_branches.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, render_dot(m));
  const auto s = cli({"render", fixture_path("dense_conv_fixed.json"), "--shapes"});
  EXPECT_NE(s.out.find("out:[1,1]"), std::string::npos);
}

TEST(Cli, FailuresExitThree)
{
  auto r = cli({"check", fixture_path("does_not_exist.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());

  const auto dir = scratch_dir();
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "bad.json", R"({"name": "b", "inputs": [], "layers": [{"id": "L", "kind": "Nope"}]})");
  r = cli({"check", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("Nope"), std::string::npos) << r.err;
  std::filesystem::remove_all(dir);

  EXPECT_EQ(cli({"check", fixture_path("dense_conv.json"), "--format", "xml"}).code, 3);
  EXPECT_EQ(cli({"frobnicate"}).code, 3);
  EXPECT_EQ(cli({}).code, 3);
}
