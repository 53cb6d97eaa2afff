#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "moa_lab/layer_dhm.hpp"

using namespace moa_lab;

namespace {

FeaturePatch random_patch(std::size_t c, std::size_t j, std::size_t k, std::mt19937_64& rng, unsigned bits = 8) {
  const std::int64_t half = std::int64_t{1} << (bits - 1);
  FeaturePatch p{c, j, k, std::vector<std::int64_t>(c * j * k)};
  for (auto& v : p.values) v = static_cast<std::int64_t>(rng() % (2 * half)) - half;
  return p;
}

WeightTensor random_weights(std::size_t n, std::size_t c, std::size_t j, std::size_t k, std::mt19937_64& rng,
                            double zero_fraction) {
  std::vector<std::int64_t> values(n * c * j * k);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (auto& v : values) v = coin(rng) < zero_fraction ? 0 : static_cast<std::int64_t>(rng() % 256) - 128;
  return WeightTensor(n, c, j, k, std::move(values));
}

}  // namespace

TEST(DotProductRef, Examples) {
  const WeightTensor zeros(1, 2, 2, 2, std::vector<std::int64_t>(8, 0));
  const FeaturePatch x{2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8}};
  EXPECT_EQ(dot_product_ref(x, zeros, 0), 0);

  std::vector<std::int64_t> one_hot(8, 0);
  one_hot[(1 * 2 + 0) * 2 + 1] = 1;  // (c=1, j=0, k=1)
  EXPECT_EQ(dot_product_ref(x, WeightTensor(1, 2, 2, 2, one_hot), 0), x.at(1, 0, 1));

  const WeightTensor desc(1, 2, 2, 2, {8, 7, 6, 5, 4, 3, 2, 1});
  EXPECT_EQ(dot_product_ref(x, desc, 0), 120);
}

TEST(DotProductRef, ShapeMismatch) {
  const WeightTensor w(1, 2, 2, 2, std::vector<std::int64_t>(8, 1));
  const FeaturePatch bad{2, 2, 1, {1, 2, 3, 4}};
  EXPECT_THROW(dot_product_ref(bad, w, 0), InputDomainError);
  const FeaturePatch ok{2, 2, 2, std::vector<std::int64_t>(8, 1)};
  EXPECT_THROW(dot_product_ref(ok, w, 1), InputDomainError);
}

TEST(WeightTensor, ValueCountChecked) {
  EXPECT_THROW(WeightTensor(2, 1, 1, 1, {1}), InputDomainError);
  EXPECT_THROW(WeightTensor(0, 1, 1, 1, {}), InputDomainError);
}

TEST(OperandStats, DenseConv1Shape) {
  const WeightTensor w = synthetic_weights({96, 3, 11, 11}, SyntheticSparsity::Dense, 1);
  const OperandStats s = operand_stats(w);
  EXPECT_EQ(s.cjk, 363u);
  EXPECT_EQ(s.n_opd, 363.0);
  EXPECT_EQ(s.per_filter_nonzero.size(), 96u);
}

TEST(OperandStats, HalfZeroed) {
  const WeightTensor w = synthetic_weights({8, 2, 3, 3}, SyntheticSparsity::HalfZero, 3);
  const OperandStats s = operand_stats(w);
  EXPECT_EQ(s.n_opd, 9.0);
  for (std::size_t nz : s.per_filter_nonzero) EXPECT_EQ(nz, 9u);
}

TEST(ParseWeights, ReadsValuesAcrossLines) {
  std::istringstream in("2 1 1 3\n1 -2\n+3 0\n\n 5 -6 \n");
  const WeightTensor w = parse_weights(in);
  EXPECT_EQ(w.n_filters(), 2u);
  EXPECT_EQ(w.cjk(), 3u);
  EXPECT_EQ(w.values(), (std::vector<std::int64_t>{1, -2, 3, 0, 5, -6}));
  EXPECT_EQ(w.at(1, 0, 0, 2), -6);
}

TEST(ParseWeights, WriteThenParseIsIdentity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightTensor w = random_weights(1 + rng() % 4, 1 + rng() % 3, 1 + rng() % 3, 1 + rng() % 3, rng, 0.3);
    std::stringstream buf;
    write_weights(buf, w);
    const WeightTensor back = parse_weights(buf);
    ASSERT_EQ(back.values(), w.values());
    ASSERT_EQ(back.shape(), w.shape());
  }
}

TEST(ParseWeights, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_weights(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("\n2 1 1\n"), 2u);
  EXPECT_EQ(line_of("1 1 1 0\n"), 1u);
  EXPECT_EQ(line_of("1 1 1 x\n"), 1u);
  EXPECT_EQ(line_of("1 1 1 3\n1 2\n3.5\n"), 3u);
  EXPECT_EQ(line_of("1 1 1 2\n1\n2\n3\n"), 4u);
  EXPECT_EQ(line_of("1 1 1 4\n1 2\n3\n"), 3u);
}

TEST(LoadWeights, MissingFileIsIoError) { EXPECT_THROW(load_weights("/nonexistent/w.txt"), IoError); }

TEST(MapLayer, SingleNonzeroWeightNeedsNoAdders) {
  const WeightTensor w(1, 1, 2, 2, {0, 5, 0, 0});
  const LayerReport r = map_layer(w.shape(), w);
  ASSERT_EQ(r.filters.size(), 1u);
  EXPECT_EQ(r.filters[0].adder_count, 0u);
  EXPECT_EQ(r.filters[0].cost.component("moa"), 0.0);
  EXPECT_EQ(r.total_adders, 0u);
  const FeaturePatch x{1, 2, 2, {3, -7, 1, 1}};
  EXPECT_EQ(evaluate_filter(r, 0, x), -35);
}

TEST(MapLayer, AllZeroFilter) {
  const WeightTensor w(2, 1, 1, 3, {0, 0, 0, 1, 2, 3});
  const LayerReport r = map_layer(w.shape(), w);
  EXPECT_EQ(r.filters[0].adder_count, 0u);
  EXPECT_EQ(r.filters[0].moa_fraction, 0.0);
  EXPECT_EQ(r.filters[1].adder_count, 2u);
  const FeaturePatch x{1, 1, 3, {1, 1, 1}};
  EXPECT_EQ(evaluate_layer(r, x), (std::vector<std::int64_t>{0, 6}));
}

TEST(MapLayer, DenseConv3Shape) {
  const LayerShape shape{384, 256, 3, 3, 13, 13};
  const WeightTensor w = synthetic_weights(shape, SyntheticSparsity::Dense, 3);
  const LayerReport r = map_layer(shape, w);
  EXPECT_EQ(r.moa_count(), 384u);
  for (const auto& f : r.filters) {
    ASSERT_EQ(f.n_opd(), 2304u);
    ASSERT_EQ(f.adder_count, 2303u);
  }
  EXPECT_EQ(r.total_adders, 384u * 2303u);
}

TEST(MapLayer, ShapeMismatch) {
  const WeightTensor w(1, 1, 2, 2, {1, 2, 3, 4});
  EXPECT_THROW(map_layer({1, 1, 2, 3}, w), InputDomainError);
  EXPECT_THROW(map_layer({2, 1, 2, 2}, w), InputDomainError);
}

TEST(MapLayer, AdderCountIsNonzeroMinusOne) {
  std::mt19937_64 rng(21);
  const WeightTensor w = random_weights(16, 3, 3, 3, rng, 0.6);
  const LayerReport r = map_layer(w.shape(), w);
  const OperandStats s = operand_stats(w);
  for (std::size_t n = 0; n < 16; ++n) {
    const std::size_t nz = s.per_filter_nonzero[n];
    EXPECT_EQ(r.filters[n].adder_count, nz == 0 ? 0 : nz - 1);
  }
  EXPECT_EQ(r.n_opd, s.n_opd);
}

TEST(MapLayer, ExactEvaluationMatchesDotProduct) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1'000; ++trial) {
    std::size_t c = 1 + rng() % 16, j = 1 + rng() % 5, k = 1 + rng() % 5;
    while (c * j * k > 512) c = 1 + rng() % 16;
    const WeightTensor w = random_weights(1 + rng() % 3, c, j, k, rng, (rng() % 4) / 4.0);
    const FeaturePatch x = random_patch(c, j, k, rng);
    const LayerReport r = map_layer(w.shape(), w, {}, 1);
    const auto y = evaluate_layer(r, x);
    for (std::size_t n = 0; n < w.n_filters(); ++n) ASSERT_EQ(y[n], dot_product_ref(x, w, n));
  }
}

TEST(MapLayer, SerialArchitectureMatchesDotProduct) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 1 + rng() % 8, j = 1 + rng() % 4, k = 1 + rng() % 4;
    const WeightTensor w = random_weights(2, c, j, k, rng, 0.25);
    const FeaturePatch x = random_patch(c, j, k, rng);
    MapOptions opt;
    opt.arch = SerialArch{1 + rng() % 9};
    const LayerReport r = map_layer(w.shape(), w, opt, 1);
    const auto y = evaluate_layer(r, x);
    for (std::size_t n = 0; n < 2; ++n) ASSERT_EQ(y[n], dot_product_ref(x, w, n));
  }
}

TEST(MapLayer, SerialArchitectureCostsMoreThanTree) {
  const WeightTensor w = synthetic_weights({4, 3, 3, 3}, SyntheticSparsity::Dense, 5);
  MapOptions serial;
  serial.arch = SerialArch{6};
  EXPECT_GT(map_layer(w.shape(), w, serial).cost.component("moa"), map_layer(w.shape(), w).cost.component("moa"));
}

TEST(MapLayer, ZeroWeightsAddNothing) {
  std::mt19937_64 rng(8);
  const WeightTensor base = random_weights(4, 1, 1, 20, rng, 0.3);
  std::vector<std::int64_t> padded;
  for (std::size_t n = 0; n < 4; ++n) {
    const auto f = base.filter(n);
    padded.insert(padded.end(), f.begin(), f.end());
    padded.push_back(0);
  }
  const WeightTensor wider(4, 1, 1, 21, std::move(padded));
  const LayerReport a = map_layer(base.shape(), base);
  const LayerReport b = map_layer(wider.shape(), wider);
  EXPECT_EQ(a.cjk + 1, b.cjk);
  EXPECT_EQ(a.n_opd, b.n_opd);
  EXPECT_EQ(a.total_adders, b.total_adders);
  EXPECT_EQ(a.total_scm_adders, b.total_scm_adders);
  EXPECT_EQ(a.cost.breakdown(), b.cost.breakdown());
  EXPECT_EQ(a.moa_fraction, b.moa_fraction);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_EQ(a.filters[n].weights, b.filters[n].weights);
    EXPECT_EQ(a.filters[n].cost.breakdown(), b.filters[n].cost.breakdown());
  }
}

TEST(MapLayer, MoaFractionBoundedAndGrowsWithDotProductLength) {
  double prev = 0.0;
  for (std::size_t c : {1u, 4u, 16u, 64u, 256u}) {
    const WeightTensor w(2, c, 3, 3, std::vector<std::int64_t>(2 * c * 9, 127));
    const LayerReport r = map_layer(w.shape(), w);
    EXPECT_GE(r.moa_fraction, 0.0);
    EXPECT_LE(r.moa_fraction, 1.0);
    EXPECT_GT(r.moa_fraction, prev) << c;
    prev = r.moa_fraction;
  }
}

TEST(MapLayer, ApproximatePolicyKeepsStructureAndCost) {
  const WeightTensor w = synthetic_weights({3, 4, 3, 3}, SyntheticSparsity::Dense, 2);
  MapOptions approx;
  approx.policy = UniformRatio{0.5};
  const LayerReport exact = map_layer(w.shape(), w);
  const LayerReport loa = map_layer(w.shape(), w, approx);
  EXPECT_EQ(exact.total_adders, loa.total_adders);
  EXPECT_EQ(exact.cost.breakdown(), loa.cost.breakdown());
  std::mt19937_64 rng(3);
  const FeaturePatch x = random_patch(4, 3, 3, rng);
  EXPECT_NO_THROW(evaluate_layer(loa, x));
}

TEST(MapLayer, ThreadCountDoesNotChangeReport) {
  const WeightTensor w = synthetic_weights({16, 8, 3, 3}, SyntheticSparsity::HalfZero, 6);
  const LayerReport a = map_layer(w.shape(), w, {}, 1);
  const LayerReport b = map_layer(w.shape(), w, {}, 8);
  EXPECT_EQ(a.cost.breakdown(), b.cost.breakdown());
  EXPECT_EQ(a.moa_fraction, b.moa_fraction);
}

TEST(EvaluateFilter, ActivationRangeChecked) {
  const WeightTensor w(1, 1, 1, 2, {1, 1});
  const LayerReport r = map_layer(w.shape(), w);
  const FeaturePatch x{1, 1, 2, {128, 0}};
  EXPECT_THROW(evaluate_filter(r, 0, x), InputDomainError);
  const FeaturePatch y{1, 1, 2, {-128, 127}};
  EXPECT_EQ(evaluate_filter(r, 0, y), -1);
}
