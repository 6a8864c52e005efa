// Copyright 2026 The basketrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "basketrec/errors.hpp"
#include "basketrec/evaluation.hpp"
#include "basketrec/synthetic.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

namespace basketrec {
namespace {

using Ids = std::vector<Index>;

TEST(Metrics, PerfectFirstHit) {
  const Ids ranked = {0, 1}, truth = {0};
  EXPECT_EQ(recall_at_k(ranked, truth, 2), 1.0);
  EXPECT_EQ(precision_at_k(ranked, truth, 2), 0.5);
  EXPECT_EQ(hit_at_k(ranked, truth, 2), 1.0);
  EXPECT_EQ(ndcg_at_k(ranked, truth, 2), 1.0);
}

TEST(Metrics, HandWorkedNdcg) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(Ids{1, 0}, Ids{0}, 2), 1.0 / std::log2(3.0));
  EXPECT_NEAR(ndcg_at_k(Ids{1, 0}, Ids{0}, 2), 0.6309, 1e-4);
  const double dcg = 1.0 + 0.5;
  const double idcg = 1.0 + 1.0 / std::log2(3.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(Ids{0, 1, 2}, Ids{0, 2}, 3), dcg / idcg);
  EXPECT_NEAR(ndcg_at_k(Ids{0, 1, 2}, Ids{0, 2}, 3), 0.9198, 1e-4);
}

TEST(Metrics, AgreeWithBruteForce) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 40)(gen);
    Ids items(n);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), gen);
    const int len = std::uniform_int_distribution<int>(1, n)(gen);
    const Ids ranked(items.begin(), items.begin() + len);
    std::shuffle(items.begin(), items.end(), gen);
    const int g = std::uniform_int_distribution<int>(1, n)(gen);
    Ids truth(items.begin(), items.begin() + g);
    std::sort(truth.begin(), truth.end());
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n + 5)(gen);
    EXPECT_NEAR(recall_at_k(ranked, truth, k), oracle::brute_recall(ranked, truth, k), 1e-12);
    EXPECT_NEAR(precision_at_k(ranked, truth, k),
                oracle::brute_precision(ranked, truth, k), 1e-12);
    EXPECT_NEAR(hit_at_k(ranked, truth, k), oracle::brute_hit(ranked, truth, k), 1e-12);
    EXPECT_NEAR(ndcg_at_k(ranked, truth, k), oracle::brute_ndcg(ranked, truth, k), 1e-12);
  }
}

TEST(Metrics, Invariants) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 200; ++t) {
    Ids items(30);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), gen);
    Ids truth(items.begin(), items.begin() + 1 + t % 7);
    std::sort(truth.begin(), truth.end());
    std::shuffle(items.begin(), items.end(), gen);
    const std::size_t k = 1 + t % 12;
    const double recall = recall_at_k(items, truth, k);
    EXPECT_GE(hit_at_k(items, truth, k), recall);
    EXPECT_NEAR(precision_at_k(items, truth, k) * k, recall * truth.size(), 1e-12);
    for (double v : {recall, precision_at_k(items, truth, k),
                     ndcg_at_k(items, truth, k)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // Reordering below rank k changes nothing.
    Ids tail = items;
    std::shuffle(tail.begin() + std::min<std::size_t>(k, tail.size()), tail.end(), gen);
    EXPECT_EQ(ndcg_at_k(tail, truth, k), ndcg_at_k(items, truth, k));
  }
}

TEST(Metrics, NdcgIsOneExactlyWhenTruthLeads) {
  EXPECT_EQ(ndcg_at_k(Ids{3, 1, 0, 2}, Ids{1, 3}, 4), 1.0);
  EXPECT_LT(ndcg_at_k(Ids{3, 0, 1, 2}, Ids{1, 3}, 4), 1.0);
  // Only min(|truth|, k) positions are ideal.
  EXPECT_EQ(ndcg_at_k(Ids{3, 0}, Ids{1, 3, 2}, 1), 1.0);
}

TEST(Metrics, RejectEmptyTruthAndZeroCutoff) {
  EXPECT_THROW(recall_at_k(Ids{0}, Ids{}, 1), std::invalid_argument);
  EXPECT_THROW(ndcg_at_k(Ids{0}, Ids{0}, 0), std::invalid_argument);
}

Representations hand_state() {
  Representations r;
  r.user = Matrix(1, 2);
  r.user << 1.0, 0.0;
  r.item_user = Matrix(3, 2);
  r.item_user << 1.0, 0.0, 0.5, 0.5, 0.0, 1.0;
  r.item_basket = Matrix::Zero(3, 2);
  r.item_basket(0, 1) = 2.0;
  r.fused = r.item_user + r.item_basket;
  return r;
}

TEST(Ranking, ExcludesPartialItems) {
  const auto r = rank_items(hand_state(), 0, Ids{0}, {1.0, 0.0}, 10);
  EXPECT_EQ(std::set<Index>(r.ranked.begin(), r.ranked.end()), (std::set<Index>{1, 2}));
}

TEST(Ranking, ScoresAreManualDotProducts) {
  // query = 0.5 * (1, 0) + 0.5 * item_basket row 0 = (0.5, 1.0)
  // fused: i1 = (0.5, 0.5) -> 0.75; i2 = (0, 1) -> 1.0
  const auto r = rank_items(hand_state(), 0, Ids{0}, {0.5, 0.5}, 10);
  EXPECT_EQ(r.ranked, (Ids{2, 1}));
  // user only: i1 -> 0.5, i2 -> 0
  EXPECT_EQ(rank_items(hand_state(), 0, Ids{0}, {1.0, 0.0}, 10).ranked, (Ids{1, 2}));
}

TEST(Ranking, TiesBreakByAscendingId) {
  Representations r;
  r.user = Matrix::Ones(1, 2);
  r.item_user = Matrix::Ones(6, 2);
  r.item_basket = Matrix::Zero(6, 2);
  r.fused = r.item_user;
  EXPECT_EQ(rank_items(r, 0, Ids{2}, {1.0, 0.0}, 3).ranked, (Ids{0, 1, 3}));
}

TEST(Ranking, EmptyPartialIsRejected) {
  EXPECT_THROW(rank_items(hand_state(), 0, Ids{}, {1.0, 0.0}, 3), std::invalid_argument);
}

TEST(Evaluate, PerfectSingleBasket) {
  EvalCase c{0, 0, {0}, {1}};
  TrainConfig cfg;
  cfg.balance = 0.0;
  const std::vector<std::size_t> ks = {1, 2};
  const auto report = evaluate(hand_state(), std::span(&c, 1), ks, cfg);
  EXPECT_EQ(report.baskets, 1u);
  for (const auto& row : report.rows) {
    EXPECT_EQ(row.recall, 1.0);
    EXPECT_EQ(row.hit_ratio, 1.0);
    EXPECT_EQ(row.ndcg, 1.0);
    EXPECT_EQ(row.precision, 1.0 / row.k);
  }
}

TEST(Evaluate, RandomEmbeddingsNearRandomRankingExpectation) {
  const auto ds = planted_blocks({}, 3);
  const auto split = split_within_basket(ds, 0.5, 3);
  const auto cases = heldout_cases(split);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  const std::size_t k = 20;
  double recall = 0.0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    Representations r;
    r.user = Matrix(50, 16);
    r.item_user = Matrix(100, 16);
    for (Eigen::Index e = 0; e < r.user.size(); ++e) r.user.data()[e] = normal(gen);
    for (Eigen::Index e = 0; e < r.item_user.size(); ++e) r.item_user.data()[e] = normal(gen);
    r.item_basket = Matrix::Zero(100, 16);
    r.fused = r.item_user;
    TrainConfig cfg;
    cfg.balance = 0.0;
    const std::vector<std::size_t> ks = {k};
    recall += evaluate(r, cases, ks, cfg).rows[0].recall;
  }
  recall /= trials;
  // Each heldout item lands in the top k of the 97 candidates w.p. k/97.
  const double expected = static_cast<double>(k) / 97.0;
  EXPECT_NEAR(recall, expected, 0.02);
}

TEST(Evaluate, DeterministicAndSerialized) {
  const auto ds = planted_blocks({}, 3);
  const auto split = split_within_basket(ds, 0.8, 3);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 2;
  const std::vector<std::size_t> ks = {5, 10};
  const auto a = train_and_evaluate(split, cfg, ks);
  const auto b = train_and_evaluate(split, cfg, ks);
  EXPECT_EQ(metrics_tsv(a), metrics_tsv(b));
  EXPECT_EQ(metrics_json(a), metrics_json(b));
  EXPECT_EQ(a.baskets, split.evaluable_baskets().size());
  const auto j = nlohmann::json::parse(metrics_json(a));
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["config"]["dim"], "8");
  EXPECT_EQ(j["metrics"].size(), 2u);
  EXPECT_EQ(metrics_tsv(a).rfind("k\trecall\tprecision\thit_ratio\tndcg\tbaskets\n", 0), 0u);
  EXPECT_THROW(a.at(7), std::out_of_range);
}

TEST(Evaluate, DefaultCutoffs) {
  EXPECT_EQ(default_k_list(), (std::vector<std::size_t>{5, 10, 20, 40, 60, 80, 100}));
}

TEST(Cases, UsePartialAndHeldoutSides) {
  const auto split = split_within_basket(planted_blocks({}, 2), 0.5, 2);
  const auto cases = heldout_cases(split);
  ASSERT_EQ(cases.size(), 150u);
  EXPECT_EQ(cases[4].partial, split.train.basket_items[4]);
  EXPECT_TRUE(std::is_sorted(cases[4].truth.begin(), cases[4].truth.end()));
  const auto merged = merge_split(split);
  EXPECT_EQ(merged.num_pairs(), 900);
}

TEST(Noise, ZeroRatioIsIdentity) {
  const auto split = split_within_basket(planted_blocks({}, 2), 0.8, 2);
  Rng rng = Rng::stream(1, "noise");
  const auto noisy = inject_noise(split, 0.0, rng);
  EXPECT_EQ(noisy.train.basket_items, split.train.basket_items);
  EXPECT_EQ(noisy.heldout, split.heldout);
}

TEST(Noise, AddsFloorOfRatioTimesPairs) {
  // 20 baskets of 5 items -> 100 train pairs.
  std::vector<std::vector<Index>> baskets;
  std::vector<Index> owner;
  for (Index b = 0; b < 20; ++b) {
    baskets.push_back({0, 1, 2, 3, 4});
    owner.push_back(b % 5);
  }
  SplitDataset split;
  split.train = oracle::make_dataset(5, 30, owner, baskets);
  split.heldout.assign(20, {});
  split.heldout[0] = {5};
  Rng rng = Rng::stream(2, "noise");
  const auto noisy = inject_noise(split, 0.2, rng);
  EXPECT_EQ(noisy.train.num_pairs(), 120);
  EXPECT_EQ(noisy.heldout, split.heldout);
  noisy.validate();  // no duplicates, no overlap with heldout
  for (const auto& items : noisy.train.basket_items) {
    EXPECT_EQ(std::set<Index>(items.begin(), items.end()).size(), items.size());
  }
}

TEST(Noise, FullBasketsAreSkippedAndOverflowIsAnError) {
  SplitDataset split;
  split.train = oracle::make_dataset(2, 3, {0, 1}, {{0, 1, 2}, {0}});
  split.heldout.assign(2, {});
  Rng rng = Rng::stream(3, "noise");
  const auto noisy = inject_noise(split, 0.5, rng);  // floor(0.5 * 4) = 2
  EXPECT_EQ(noisy.train.basket_items[0].size(), 3u);
  EXPECT_EQ(noisy.train.basket_items[1].size(), 3u);
  Rng again = Rng::stream(3, "noise");
  EXPECT_THROW(inject_noise(split, 1.0, again), DataError);
}

TEST(NoiseSweep, OneRunPerRatioSeedAndVariant) {
  const auto split = split_within_basket(planted_blocks({}, 2), 0.8, 2);
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 1;
  const std::vector<double> ratios = {0.0, 0.5};
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const std::vector<std::size_t> ks = {20};
  const auto runs = noise_sweep(split, cfg, ratios, seeds, ks);
  EXPECT_EQ(runs.size(), 12u);
  EXPECT_EQ(runs[1].variant, "lightgcn-only");
  EXPECT_FALSE(runs[1].report.config.use_hypergraph);
  EXPECT_EQ(runs[2].seed, 2u);
  const auto curve = curve_tsv(runs);
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 13);
  const double d = median_relative_degradation(runs, "full", 0.5, 20);
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_EQ(median_relative_degradation(runs, "full", 0.0, 20), 0.0);
}

}  // namespace
}  // namespace basketrec
