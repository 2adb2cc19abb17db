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

#include <random>

#include "nnrepair/execute.h"
#include "support.h"

using namespace nnrepair;
using namespace nnrepair::test;

namespace
{

constexpr std::int64_t kDim = 100000000000000000;

TensorShape shape_of(IntList dims) { return TensorShape{std::move(dims)}; }

LayerNode dense(std::int64_t units, IntList kernel_shape)
{
  auto n = make_node("Den00001", LayerKind::Dense, {"in0"}, {{"units", units}});
  std::vector<double> values(static_cast<std::size_t>(kernel_shape[0] * kernel_shape[1]), 0.5);
  n.weights = std::make_shared<WeightSpec>(WeightSpec{NdArray{kernel_shape, values}, std::nullopt});
  return n;
}

/// Valid-padding Conv1D over [steps, channels]; kernel (k, channels, filters).
std::vector<double> oracle_conv1d(const std::vector<double> &in, std::size_t steps, std::size_t channels,
                                  const std::vector<double> &kernel, std::size_t k, std::size_t filters,
                                  std::size_t stride, std::size_t dilation)
{
  const std::size_t span = dilation * (k - 1) + 1;
  const std::size_t out_steps = (steps - span) / stride + 1;
  std::vector<double> out(out_steps * filters, 0.0);
  for (std::size_t t = 0; t < out_steps; ++t)
    for (std::size_t f = 0; f < filters; ++f)
    {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < channels; ++c)
          acc += in[(t * stride + j * dilation) * channels + c] * kernel[(j * channels + c) * filters + f];
      out[t * filters + f] = acc;
    }
  return out;
}

TensorMap random_inputs(const ModelGraph &model, std::uint64_t seed)
{
  std::mt19937_64 rng{seed};
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  TensorMap inputs;
  for (const auto &in : model.inputs)
    if (!in.fill)
    {
      std::vector<double> values(static_cast<std::size_t>(in.shape.elements()));
      for (auto &v : values)
        v = value(rng);
      inputs.emplace(in.id, Tensor{in.shape, values});
    }
  return inputs;
}

} // namespace

TEST(Badness, FactorLadder)
{
  EXPECT_EQ(compute_badness(ErrorKind::DimensionError, 1), -kDim);
  EXPECT_EQ(compute_badness(ErrorKind::InputShapeMismatch, 3), -30000000000000);
  EXPECT_EQ(compute_badness(ErrorKind::WeightShapeError, 2), -2000000000);
  EXPECT_EQ(compute_badness(ErrorKind::WindowOverflow, 1), -100000);
  EXPECT_EQ(compute_badness(ErrorKind::ArgumentError, 1), -1000);
  EXPECT_THROW(compute_badness(ErrorKind::ArgumentError, 0), std::invalid_argument);
}

TEST(Badness, StrictlyMonotoneInDistance)
{
  for (auto kind : {ErrorKind::DimensionError, ErrorKind::InputShapeMismatch, ErrorKind::ArgumentError,
                    ErrorKind::WeightShapeError, ErrorKind::WindowOverflow})
    for (std::int64_t d = 1; d < 50; ++d)
    {
      EXPECT_GT(compute_badness(kind, d), compute_badness(kind, d + 1));
      EXPECT_LT(compute_badness(kind, d), 0);
    }
}

TEST(CheckMinDimensions, RankCases)
{
  const auto d = check_min_dimensions(shape_of({1, 16}), 3);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, ErrorKind::DimensionError);
  EXPECT_EQ(d->badness, -kDim);
  EXPECT_FALSE(check_min_dimensions(shape_of({1, 4, 4}), 3));
  EXPECT_FALSE(check_min_dimensions(shape_of({1, 2, 2, 2, 2}), 3));
}

TEST(CheckExactDimensions, Cases)
{
  EXPECT_FALSE(check_exact_dimensions(shape_of({1, 2, 3, 4}), 4));
  const auto d = check_exact_dimensions(shape_of({1, 2, 2, 2, 2, 2}), 4);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->badness, -2 * kDim);
}

TEST(CheckExactDimensions, MaxPooling3DOnRank4)
{
  const auto r = infer_shapes(load_fixture("pool_rank.json"));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(r.diagnostic->layer_id, "Max00003");
  EXPECT_EQ(r.diagnostic->kind, ErrorKind::DimensionError);
  EXPECT_EQ(r.diagnostic->expected, (std::vector<Fact>{{"Dimensions", {}, 5}}));
}

TEST(CheckWeightConsistency, DenseCases)
{
  const auto in = TensorShape::batched({10});
  EXPECT_FALSE(check_weight_consistency(dense(16, {10, 16}), in));
  const auto d = check_weight_consistency(dense(16, {8, 16}), in);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, ErrorKind::WeightShapeError);
  EXPECT_EQ(d->badness, -2000000000);
  EXPECT_EQ(d->expected[0].lists[0], (IntList{10, 16}));
}

TEST(CheckWeightConsistency, Conv1DKernelLayout)
{
  auto n = make_node("Con00001", LayerKind::Conv1D, {"in0"}, {{"filters", std::int64_t{2}}, {"kernel_size", IntList{2}}});
  n.weights = std::make_shared<WeightSpec>(WeightSpec{NdArray{{2, 1, 2}, std::vector<double>(4, 1.0)}, std::nullopt});
  EXPECT_FALSE(check_weight_consistency(n, TensorShape::batched({8, 1})));
}

TEST(CheckMultiInputShapes, Cases)
{
  const auto add = make_node("Add00001", LayerKind::Add, {"a", "b"});
  const std::vector<TensorShape> bad{shape_of({1, 2, 2}), shape_of({1, 5, 2})};
  const auto d = check_multi_input_shapes(add, bad);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, ErrorKind::InputShapeMismatch);
  EXPECT_EQ(d->badness, -30000000000000);

  const std::vector<TensorShape> same{shape_of({1, 2, 2}), shape_of({1, 2, 2})};
  EXPECT_FALSE(check_multi_input_shapes(add, same));

  const auto cat = make_node("Con00001", LayerKind::Concatenate, {"a", "b"}, {{"axis", std::int64_t{1}}});
  const std::vector<TensorShape> axis_only{shape_of({1, 2, 3}), shape_of({1, 4, 3})};
  EXPECT_FALSE(check_multi_input_shapes(cat, axis_only));
}

TEST(CheckArgConsistency, StridesWithDilation)
{
  auto conv = make_node("Con00001", LayerKind::Conv1D, {"in0"},
                        {{"filters", std::int64_t{1}}, {"kernel_size", IntList{2}}, {"strides", IntList{3}},
                         {"dilation_rate", IntList{3}}});
  const auto d = check_arg_consistency(conv);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, ErrorKind::ArgumentError);
  EXPECT_EQ(d->badness, -1000);

  conv.attrs["dilation_rate"] = IntList{1};
  EXPECT_FALSE(check_arg_consistency(conv));

  auto conv2 = make_node("Con00002", LayerKind::Conv2D, {"in0"},
                         {{"filters", std::int64_t{1}}, {"kernel_size", IntList{2, 2}}, {"strides", IntList{1, 1}},
                          {"dilation_rate", IntList{2, 2}}});
  EXPECT_FALSE(check_arg_consistency(conv2));
}

TEST(CheckWindowFits, Cases)
{
  auto pool = make_node("Max00001", LayerKind::MaxPooling2D, {"in0"}, {{"pool_size", IntList{9, 9}}});
  const auto d = check_window_fits(pool, shape_of({1, 8, 8, 8}));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->kind, ErrorKind::WindowOverflow);
  EXPECT_EQ(d->badness, -200000);

  const auto crop = make_node("Cro00001", LayerKind::Cropping1D, {"in0"}, {{"cropping", IntList{2, 2}}});
  EXPECT_TRUE(check_window_fits(crop, shape_of({1, 4, 4})));

  pool.attrs["pool_size"] = IntList{1, 1};
  for (std::int64_t n = 1; n <= 4; ++n)
    EXPECT_FALSE(check_window_fits(pool, shape_of({1, n, n, 3})));
}

TEST(InferShapes, DenseConvAbortsAtConv)
{
  const auto r = infer_shapes(load_fixture("dense_conv.json"));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(r.diagnostic->layer_id, "Con60545");
  EXPECT_EQ(r.diagnostic->location, 2u);
  EXPECT_EQ(r.diagnostic->badness, -kDim);
  EXPECT_FALSE(r.shapes.count("Con60545"));
}

TEST(InferShapes, DenseConvFixedShapesMatchOracle)
{
  const auto r = infer_shapes(load_fixture("dense_conv_fixed.json"));
  ASSERT_TRUE(r.ok()) << r.diagnostic->message();
  // Conv1D k=2 same padding keeps 16 steps; pool 4 stride 3 valid.
  EXPECT_EQ(r.shapes.at("Con60545").dims(), (IntList{1, oracle_window_len(16, 2, 1, 1, true), 16}));
  EXPECT_EQ(r.shapes.at("Max46787").dims(), (IntList{1, oracle_window_len(16, 4, 3, 1, false), 16}));
  EXPECT_EQ(r.shapes.at("Max46787").dims(), (IntList{1, 5, 16}));
  EXPECT_EQ(r.shapes.at("Den25740").dims(), (IntList{1, 1}));
}

TEST(InferShapes, SingleReLU)
{
  const auto r = infer_shapes(single_layer(make_node("ReL00001", LayerKind::ReLU, {}), {4}));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.shapes.at("ReL00001").dims(), (IntList{1, 4}));
}

TEST(InferShapes, DilatedConvExampleLengths)
{
  auto c1 = make_node("C1", LayerKind::Conv1D, {}, {{"filters", std::int64_t{2}}, {"kernel_size", IntList{2}},
                                                    {"dilation_rate", IntList{3}}});
  auto c2 = c1;
  c2.attrs["strides"] = IntList{3};
  c2.attrs["dilation_rate"] = IntList{1};
  EXPECT_EQ(infer_shapes(single_layer(c1, {8, 1})).shapes.at("C1")[1], 5);
  EXPECT_EQ(infer_shapes(single_layer(c2, {16, 1})).shapes.at("C1")[1], 5);
}

TEST(InferShapes, WindowRulesMatchOracle)
{
  std::mt19937_64 rng{11};
  std::uniform_int_distribution<std::int64_t> small(1, 4), len(1, 20);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial)
  {
    const bool conv = trial % 2 == 0;
    const bool same = rng() % 2 == 0;
    const auto k = small(rng), s = small(rng), in = len(rng);
    const auto d = conv && s == 1 ? small(rng) : 1;
    LayerNode n = conv ? make_node("L", LayerKind::Conv1D, {},
                                   {{"filters", std::int64_t{3}}, {"kernel_size", IntList{k}}, {"strides", IntList{s}},
                                    {"dilation_rate", IntList{d}}})
                       : make_node("L", LayerKind::AveragePooling1D, {}, {{"pool_size", IntList{k}}, {"strides", IntList{s}}});
    n.attrs["padding"] = std::string{same ? "same" : "valid"};
    const auto r = infer_shapes(single_layer(n, {in, 2}));
    const auto span = d * (k - 1) + 1;
    if (!same && span > in)
    {
      ASSERT_TRUE(r.diagnostic);
      EXPECT_EQ(r.diagnostic->kind, ErrorKind::WindowOverflow);
      EXPECT_EQ(r.diagnostic->badness, -(span - in) * 100000);
      continue;
    }
    ASSERT_TRUE(r.ok()) << r.diagnostic->message();
    EXPECT_EQ(r.shapes.at("L")[1], oracle_window_len(in, k, s, d, same));
    EXPECT_EQ(r.shapes.at("L")[2], conv ? 3 : 2);
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(InferShapes, ShapePreservingLayers)
{
  std::mt19937_64 rng{5};
  std::uniform_int_distribution<std::int64_t> dim(1, 6), rank(1, 4);
  for (auto kind : {LayerKind::ReLU, LayerKind::LeakyReLU, LayerKind::Softmax, LayerKind::BatchNormalization})
    for (int trial = 0; trial < 50; ++trial)
    {
      IntList dims(static_cast<std::size_t>(rank(rng)));
      for (auto &x : dims)
        x = dim(rng);
      const auto r = infer_shapes(single_layer(make_node("L", kind, {}), dims));
      ASSERT_TRUE(r.ok()) << kind_name(kind);
      EXPECT_EQ(r.shapes.at("L"), TensorShape::batched(dims)) << kind_name(kind);
    }
}

TEST(InferShapes, AbortsAtFirstViolation)
{
  int invalid = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed)
  {
    GenConfig g = fuzz_config(seed);
    g.inject_bugs = 0;
    const auto model = generate_model(g);
    const auto r = infer_shapes(model);
    const auto order = topo_order(model);
    // Replay every node on its own with shapes built only from its inputs.
    ShapeMap shapes;
    for (const auto &in : model.inputs)
      shapes.emplace(in.id, in.shape);
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < order.size(); ++i)
    {
      const auto &node = *model.find_node(order[i]);
      std::vector<TensorShape> in;
      for (const auto &src : node.inputs)
        in.push_back(shapes.at(src));
      if (check_layer(node, in))
      {
        first = i;
        break;
      }
      shapes.emplace(node.id, output_shape(node, in));
    }
    if (!first)
    {
      EXPECT_TRUE(r.ok()) << "seed " << seed;
      continue;
    }
    ++invalid;
    ASSERT_TRUE(r.diagnostic) << "seed " << seed;
    EXPECT_EQ(r.diagnostic->location, *first) << "seed " << seed;
    EXPECT_EQ(r.diagnostic->layer_id, order[*first]) << "seed " << seed;
    EXPECT_EQ(r.shapes.size(), model.inputs.size() + *first) << "seed " << seed;
  }
  EXPECT_GT(invalid, 100);
}

TEST(InferShapes, DeterministicMessages)
{
  for (std::uint64_t seed = 1; seed <= 100; ++seed)
  {
    const auto model = generate_model(fuzz_config(seed));
    const auto a = infer_shapes(model), b = infer_shapes(generate_model(fuzz_config(seed)));
    ASSERT_EQ(a.ok(), b.ok());
    if (!a.ok())
    {
      EXPECT_EQ(a.diagnostic->message(), b.diagnostic->message());
    }
  }
}

TEST(FormatDiagnostic, DenseConvBlock)
{
  const auto r = infer_shapes(load_fixture("dense_conv.json"));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(format_diagnostic(*r.diagnostic),
            "Invalid Model, Badness Value: -100000000000000000\n"
            "Aborted at Con60545: Dimension Error, Input Shape [1,16], Expected Dimensions 3!!!");
}

TEST(FormatDiagnostic, MismatchAndOverflowTemplates)
{
  auto r = infer_shapes(load_fixture("concat_branches.json"));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(format_diagnostic(*r.diagnostic),
            "Invalid Model, Badness Value: -30000000000000\n"
            "Aborted at A: Input Shape Mismatch, Input Shapes [1,2,2] and [1,5,2], Expected Equal Shapes!!!");
  r = infer_shapes(load_fixture("maxpool2d.json"));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(format_diagnostic(*r.diagnostic), "Invalid Model, Badness Value: -200000\n"
                                              "Aborted at Max00001: Window Overflow, Pool Size [9,9], Expected Max [8,8]!!!");
}

TEST(ExecuteModel, DenseExamples)
{
  const auto shape = TensorShape::batched({2});
  auto n = make_node("Den00001", LayerKind::Dense, {}, {{"units", std::int64_t{2}}});
  n.weights = std::make_shared<WeightSpec>(WeightSpec{NdArray{{2, 2}, {1, 0, 0, 1}}, NdArray{{2}, {0, 0}}});
  auto r = execute_model(single_layer(n, {2}), {{"in0", Tensor{shape, {1, 2}}}});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tensors.at("Den00001").values, (std::vector<double>{1, 2}));

  n.attrs["units"] = std::int64_t{1};
  n.weights = std::make_shared<WeightSpec>(WeightSpec{NdArray{{2, 1}, {1, 1}}, NdArray{{1}, {3}}});
  r = execute_model(single_layer(n, {2}), {{"in0", Tensor{shape, {1, 2}}}});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.tensors.at("Den00001").values, (std::vector<double>{6}));
}

TEST(ExecuteModel, DenseMatchesOracle)
{
  std::mt19937_64 rng{3};
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  std::uniform_int_distribution<std::int64_t> size(1, 5);
  for (int trial = 0; trial < 1000; ++trial)
  {
    IntList dims;
    for (int i = 0; i < trial % 4; ++i)
      dims.push_back(size(rng));
    const auto features = size(rng), units = size(rng);
    dims.push_back(features);
    const auto shape = TensorShape::batched(dims);
    const auto rows = static_cast<std::size_t>(shape.elements() / features);
    std::vector<double> in(rows * features), kernel(features * units), bias(units);
    for (auto *v : {&in, &kernel, &bias})
      for (auto &x : *v)
        x = value(rng);
    auto n = make_node("Den00001", LayerKind::Dense, {}, {{"units", units}});
    n.weights = std::make_shared<WeightSpec>(WeightSpec{NdArray{{features, units}, kernel}, NdArray{{units}, bias}});
    const auto r = execute_model(single_layer(n, dims), {{"in0", Tensor{shape, in}}});
    ASSERT_TRUE(r.ok());
    const auto expected = oracle_dense(in, rows, features, kernel, units, bias);
    const auto &got = r.tensors.at("Den00001").values;
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got[i], expected[i], 1e-9);
  }
}

TEST(ExecuteModel, Conv1DMatchesOracle)
{
  std::mt19937_64 rng{9};
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> small(1, 3);
  for (int trial = 0; trial < 300; ++trial)
  {
    const auto k = small(rng), channels = small(rng), filters = small(rng), stride = small(rng);
    const std::size_t dilation = stride == 1 ? small(rng) : 1;
    const std::size_t steps = dilation * (k - 1) + 1 + small(rng) * 2;
    std::vector<double> in(steps * channels), kernel(k * channels * filters);
    for (auto *v : {&in, &kernel})
      for (auto &x : *v)
        x = value(rng);
    const auto i64 = [](std::size_t v) { return static_cast<std::int64_t>(v); };
    auto n = make_node("C", LayerKind::Conv1D, {},
                       {{"filters", i64(filters)}, {"kernel_size", IntList{i64(k)}}, {"strides", IntList{i64(stride)}},
                        {"dilation_rate", IntList{i64(dilation)}}});
    n.weights =
        std::make_shared<WeightSpec>(WeightSpec{NdArray{{i64(k), i64(channels), i64(filters)}, kernel}, std::nullopt});
    const auto shape = TensorShape::batched({i64(steps), i64(channels)});
    const auto r = execute_model(single_layer(n, {i64(steps), i64(channels)}), {{"in0", Tensor{shape, in}}});
    ASSERT_TRUE(r.ok()) << r.diagnostic->message();
    const auto expected = oracle_conv1d(in, steps, channels, kernel, k, filters, stride, dilation);
    const auto &got = r.tensors.at("C").values;
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got[i], expected[i], 1e-9);
  }
}

TEST(ExecuteModel, ShapesAgreeWithInference)
{
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
  {
    GenConfig g;
    g.seed = seed;
    g.valid = true;
    g.value_executable_only = true;
    g.graph_mode = seed % 2 == 0;
    const auto model = generate_model(g);
    const auto shapes = infer_shapes(model);
    ASSERT_TRUE(shapes.ok()) << "seed " << seed;
    const auto r = execute_model(model, random_inputs(model, seed));
    ASSERT_TRUE(r.ok()) << "seed " << seed;
    for (const auto &[id, shape] : shapes.shapes)
    {
      ASSERT_TRUE(r.tensors.count(id)) << id;
      EXPECT_EQ(r.tensors.at(id).shape, shape) << "seed " << seed << " " << id;
      EXPECT_EQ(r.tensors.at(id).values.size(), static_cast<std::size_t>(shape.elements()));
    }
  }
}

TEST(ExecuteModel, ShapeOnlyKindIsUnsupported)
{
  auto n = make_node("LST00001", LayerKind::LSTM, {}, {{"units", std::int64_t{2}}});
  const auto m = single_layer(n, {3, 2});
  ASSERT_TRUE(infer_shapes(m).ok());
  EXPECT_THROW(execute_model(m, random_inputs(m, 1)), UnsupportedKind);
}

TEST(ExecuteModel, InvalidModelReturnsDiagnostic)
{
  const auto m = load_fixture("concat_branches.json");
  const auto r = execute_model(m, random_inputs(m, 1));
  ASSERT_TRUE(r.diagnostic);
  EXPECT_EQ(r.diagnostic->kind, ErrorKind::InputShapeMismatch);
}
