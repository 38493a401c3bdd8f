#include <gtest/gtest.h>

#include <cmath>

#include "exhird/exclusion.hpp"
#include "exhird/nn/gradcheck.hpp"
#include "test_support.hpp"

namespace exhird::exclusion {
namespace {

using namespace exhird::testing;

ExclusionWindow window_of(std::size_t capacity, std::initializer_list<TokenId> ids) {
  ExclusionWindow w(capacity);
  for (auto id : ids) w.push(id);
  return w;
}

double oracle(const std::vector<double>& p, TokenId target, const std::deque<TokenId>& window) {
  double s = 0;
  for (auto w : window)
    if (w != target) s += -std::log(1.0 - std::min(p[w], 1.0 - 1e-7) + 1e-12);
  return s;
}

TEST(ExclusiveLoss, SkipsTheCurrentTarget) {
  Graph<double> g;
  auto p = g.constant(Tensor<double>::vector({0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.3, 0.2}));
  auto w = window_of(2, {6, 7});
  EXPECT_NEAR(exclusive_loss(p, 7, w, 1).item(), 0.69314718056, 1e-9);
  EXPECT_NEAR(exclusive_loss(p, 8, w, 1).item(), -std::log(0.5 + 1e-12) - std::log(0.7 + 1e-12), 1e-12);
}

TEST(ExclusiveLoss, OnlyAppliesAtTheFirstWord) {
  Graph<double> g;
  auto p = g.constant(Tensor<double>::vector({0.1, 0.2, 0.7}));
  auto w = window_of(4, {1, 2});
  EXPECT_EQ(exclusive_loss(p, 0, w, 0).item(), 0.0);
  EXPECT_EQ(exclusive_loss(p, 0, w, 2).item(), 0.0);
  EXPECT_GT(exclusive_loss(p, 0, w, 1).item(), 0.0);
  EXPECT_EQ(exclusive_loss(p, 0, ExclusionWindow(4), 1).item(), 0.0);
}

TEST(ExclusiveLoss, ClampKeepsCertaintyFinite) {
  Graph<double> g;
  auto p = g.constant(Tensor<double>::vector({0.0, 1.0}));
  const double v = exclusive_loss(p, 0, window_of(1, {1}), 1).item();
  EXPECT_NEAR(v, -std::log(1e-7 + 1e-12), 1e-6);
}

TEST(ExclusiveLoss, MatchesOracleOnRandomDistributions) {
  nn::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> p(n);
    double z = 0;
    for (auto& v : p) z += v = rng.unit();
    for (auto& v : p) v /= z;
    ExclusionWindow w(1 + rng.below(5));
    for (std::size_t k = 0, m = rng.below(8); k < m; ++k) w.push(rng.below(n));
    const TokenId target = rng.below(n);
    Graph<double> g;
    auto loss = exclusive_loss(g.constant(Tensor<double>::vector(p)), target, w, 1);
    EXPECT_NEAR(loss.item(), oracle(p, target, w.first_words()), 1e-12);
    EXPECT_GE(loss.item(), 0.0);
  }
}

TEST(ExclusiveLoss, GradientMatchesFiniteDifferences) {
  nn::Rng rng(4);
  ParamPool pool;
  auto& logits = pool.make("logits", random_tensor(rng, {7}, -2, 2));
  auto w = window_of(kAll, {2, 5, 2, 6});
  auto report = nn::finite_difference_check(
      [&](Graph<double>& g) { return exclusive_loss(nn::softmax(g.param(logits)), 6, w, 1); }, pool.all());
  EXPECT_TRUE(report.passed) << report.max_relative_error;
}

TEST(SearchMask, ZeroesWindowEntriesWithoutRenormalising) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  auto w = window_of(2, {3, 1});
  EXPECT_EQ(exclusive_search_mask<double>(p, w, 1), (std::vector<double>{0.1, 0.0, 0.3, 0.0}));
  EXPECT_EQ(exclusive_search_mask<double>(p, w, 2), p);
  EXPECT_EQ(exclusive_search_mask<double>(p, w, 0), p);
}

TEST(Window, KeepsTheMostRecentEntries) {
  auto w = window_of(2, {6, 7, 8});
  EXPECT_EQ(w.first_words(), (std::deque<TokenId>{7, 8}));
  EXPECT_FALSE(w.contains(6));
  EXPECT_TRUE(window_of(0, {6, 7}).empty());
  EXPECT_EQ(window_of(kAll, {1, 2, 3, 4, 5}).size(), 5u);

  // effective window at PD step i is min(K, i - 1)
  ExclusionWindow k3(3);
  for (std::size_t i = 1; i <= 6; ++i) {
    EXPECT_EQ(k3.size(), std::min<std::size_t>(3, i - 1));
    k3.push(static_cast<TokenId>(i));
  }
  const auto pure = window_push(k3, 42);
  EXPECT_EQ(k3.first_words().back(), 6u);
  EXPECT_EQ(pure.first_words().back(), 42u);
}

TEST(Window, ParsesSizesAndModes) {
  EXPECT_EQ(parse_window("all"), kAll);
  EXPECT_EQ(parse_window("4"), 4u);
  EXPECT_EQ(window_to_string(kAll), "all");
  EXPECT_THROW(parse_window("-1"), ConfigError);
  EXPECT_THROW(parse_window("4x"), ConfigError);
  EXPECT_EQ(parse_mode("hard"), Mode::hard);
  EXPECT_THROW(parse_mode("strict"), ConfigError);
}

}  // namespace
}  // namespace exhird::exclusion
