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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "basketrec/config.hpp"
#include "basketrec/dataset.hpp"
#include "basketrec/model.hpp"
#include "basketrec/rng.hpp"

namespace basketrec {

// One basket to complete: the observed part and the items to recover.
struct EvalCase {
  Index basket = 0;
  Index user = 0;
  std::vector<Index> partial;
  std::vector<Index> truth;  // sorted
};

// Train part as the partial basket, heldout part as ground truth. Baskets
// with an empty side are skipped.
std::vector<EvalCase> heldout_cases(const SplitDataset& split);

// Merges each basket's train and heldout items back into one dataset.
InteractionDataset merge_split(const SplitDataset& split);

struct RankingResult {
  Index basket = 0;
  std::vector<Index> ranked;  // best first
  std::vector<Index> truth;   // sorted
};

// Scores every item outside `partial` against the query
// mix.user * user + mix.basket * mean(basket-view rows of partial) and
// returns the best `k_max`, ties broken by ascending item id.
RankingResult rank_items(const Representations& reps, Index user,
                         std::span<const Index> partial, const ScoreMix& mix,
                         std::size_t k_max);

double recall_at_k(std::span<const Index> ranked,
                   std::span<const Index> truth, std::size_t k);
double precision_at_k(std::span<const Index> ranked,
                      std::span<const Index> truth, std::size_t k);
double hit_at_k(std::span<const Index> ranked, std::span<const Index> truth,
                std::size_t k);
double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> truth,
                 std::size_t k);

struct MetricsRow {
  std::size_t k = 0;
  double recall = 0.0;
  double precision = 0.0;
  double hit_ratio = 0.0;
  double ndcg = 0.0;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::size_t baskets = 0;
  TrainConfig config;
  std::uint64_t seed = 0;

  const MetricsRow& at(std::size_t k) const;
};

const std::vector<std::size_t>& default_k_list();

MetricsReport evaluate(const Representations& reps,
                       std::span<const EvalCase> cases,
                       std::span<const std::size_t> ks, const TrainConfig& cfg);

// One row per K: k, recall, precision, hit_ratio, ndcg, baskets.
std::string metrics_tsv(const MetricsReport& report);
std::string metrics_json(const MetricsReport& report);

// Adds floor(ratio * train pairs) fabricated basket memberships. Each goes to
// a uniformly drawn train basket and names a uniformly drawn item the
// basket holds on neither side; full baskets are redrawn.
SplitDataset inject_noise(const SplitDataset& split, double ratio, Rng& rng);

// Trains a fresh model on the split's train side and evaluates it on the
// heldout side.
MetricsReport train_and_evaluate(const SplitDataset& split,
                                 const TrainConfig& cfg,
                                 std::span<const std::size_t> ks);

struct NoiseRun {
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::string variant;  // "full" or "lightgcn-only"
  MetricsReport report;
};

std::vector<NoiseRun> noise_sweep(const SplitDataset& split,
                                  const TrainConfig& cfg,
                                  std::span<const double> ratios,
                                  std::span<const std::uint64_t> seeds,
                                  std::span<const std::size_t> ks);

// Median over seeds of (recall(0) - recall(ratio)) / recall(0) at `k`.
// Seeds whose clean recall is zero are ignored.
double median_relative_degradation(std::span<const NoiseRun> runs,
                                   std::string_view variant, double ratio,
                                   std::size_t k);

// Long-form table: ratio, seed, variant, k, recall, precision, hit_ratio, ndcg.
std::string curve_tsv(std::span<const NoiseRun> runs);

}  // namespace basketrec
