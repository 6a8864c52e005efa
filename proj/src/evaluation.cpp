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

#include "basketrec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include "json.hpp"

#include "basketrec/errors.hpp"
#include "basketrec/propagation.hpp"
#include "basketrec/trainer.hpp"

namespace basketrec {

std::vector<EvalCase> heldout_cases(const SplitDataset& split) {
  std::vector<EvalCase> cases;
  for (Index b : split.evaluable_baskets()) {
    EvalCase c;
    c.basket = b;
    c.user = split.train.basket_owner[b];
    c.partial = split.train.basket_items[b];
    c.truth = split.heldout[b];
    std::sort(c.truth.begin(), c.truth.end());
    cases.push_back(std::move(c));
  }
  return cases;
}

InteractionDataset merge_split(const SplitDataset& split) {
  InteractionDataset full = split.train;
  for (Index b = 0; b < full.num_baskets(); ++b) {
    auto& items = full.basket_items[b];
    items.insert(items.end(), split.heldout[b].begin(), split.heldout[b].end());
  }
  return full;
}

RankingResult rank_items(const Representations& reps, Index user,
                         std::span<const Index> partial, const ScoreMix& mix,
                         std::size_t k_max) {
  if (partial.empty()) {
    throw std::invalid_argument("rank_items: partial basket is empty");
  }
  const RowVector query = mix.user * reps.user.row(user) +
                          mix.basket * basket_embedding(reps.item_basket, partial);
  const Eigen::VectorXd scores = reps.fused * query.transpose();

  std::vector<char> excluded(static_cast<std::size_t>(reps.fused.rows()), 0);
  for (Index i : partial) excluded[i] = 1;
  std::vector<Index> candidates;
  for (Index i = 0; i < static_cast<Index>(excluded.size()); ++i) {
    if (!excluded[i]) candidates.push_back(i);
  }
  const std::size_t keep = std::min(k_max, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), [&](Index a, Index b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  candidates.resize(keep);
  RankingResult result;
  result.ranked = std::move(candidates);
  return result;
}

namespace {

bool contains(std::span<const Index> sorted, Index item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

std::size_t hits(std::span<const Index> ranked, std::span<const Index> truth,
                 std::size_t k) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
    n += contains(truth, ranked[r]) ? 1 : 0;
  }
  return n;
}

void require_k(std::size_t k, std::span<const Index> truth) {
  if (k == 0) throw std::invalid_argument("metric cutoff must be at least 1");
  if (truth.empty()) throw std::invalid_argument("ground truth is empty");
}

}  // namespace

double recall_at_k(std::span<const Index> ranked, std::span<const Index> truth,
                   std::size_t k) {
  require_k(k, truth);
  return static_cast<double>(hits(ranked, truth, k)) /
         static_cast<double>(truth.size());
}

double precision_at_k(std::span<const Index> ranked,
                      std::span<const Index> truth, std::size_t k) {
  require_k(k, truth);
  return static_cast<double>(hits(ranked, truth, k)) / static_cast<double>(k);
}

double hit_at_k(std::span<const Index> ranked, std::span<const Index> truth,
                std::size_t k) {
  require_k(k, truth);
  return hits(ranked, truth, k) > 0 ? 1.0 : 0.0;
}

double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> truth,
                 std::size_t k) {
  require_k(k, truth);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
    if (contains(truth, ranked[r])) dcg += 1.0 / std::log2(r + 2.0);
  }
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, truth.size()); ++r) {
    ideal += 1.0 / std::log2(r + 2.0);
  }
  return dcg / ideal;
}

const MetricsRow& MetricsReport::at(std::size_t k) const {
  for (const auto& row : rows) {
    if (row.k == k) return row;
  }
  throw std::out_of_range(fmt::format("no metrics for K={}", k));
}

const std::vector<std::size_t>& default_k_list() {
  static const std::vector<std::size_t> ks = {5, 10, 20, 40, 60, 80, 100};
  return ks;
}

MetricsReport evaluate(const Representations& reps,
                       std::span<const EvalCase> cases,
                       std::span<const std::size_t> ks,
                       const TrainConfig& cfg) {
  if (ks.empty()) throw std::invalid_argument("evaluate: empty K list");
  MetricsReport report;
  report.config = cfg;
  report.seed = cfg.seed;
  for (std::size_t k : ks) {
    if (k == 0) throw std::invalid_argument("evaluate: K must be at least 1");
    report.rows.push_back({k});
  }
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  const ScoreMix mix = score_mix(cfg.balance, cfg.additive_score);
  for (const auto& c : cases) {
    if (c.partial.empty() || c.truth.empty()) continue;
    const RankingResult r = rank_items(reps, c.user, c.partial, mix, k_max);
    for (auto& row : report.rows) {
      row.recall += recall_at_k(r.ranked, c.truth, row.k);
      row.precision += precision_at_k(r.ranked, c.truth, row.k);
      row.hit_ratio += hit_at_k(r.ranked, c.truth, row.k);
      row.ndcg += ndcg_at_k(r.ranked, c.truth, row.k);
    }
    ++report.baskets;
  }
  if (report.baskets == 0) {
    throw EmptyDatasetError("no basket has both a partial and a heldout side");
  }
  const double n = static_cast<double>(report.baskets);
  for (auto& row : report.rows) {
    row.recall /= n;
    row.precision /= n;
    row.hit_ratio /= n;
    row.ndcg /= n;
  }
  return report;
}

std::string metrics_tsv(const MetricsReport& report) {
  std::string out = "k\trecall\tprecision\thit_ratio\tndcg\tbaskets\n";
  for (const auto& row : report.rows) {
    out += fmt::format("{}\t{:.10f}\t{:.10f}\t{:.10f}\t{:.10f}\t{}\n", row.k,
                       row.recall, row.precision, row.hit_ratio, row.ndcg,
                       report.baskets);
  }
  return out;
}

std::string metrics_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["baskets"] = report.baskets;
  nlohmann::ordered_json cfg;
  for (const auto& [key, value] : config_map(report.config)) cfg[key] = value;
  j["config"] = cfg;
  auto& metrics = j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    metrics.push_back({{"k", row.k},
                       {"recall", row.recall},
                       {"precision", row.precision},
                       {"hit_ratio", row.hit_ratio},
                       {"ndcg", row.ndcg}});
  }
  return j.dump(2) + "\n";
}

SplitDataset inject_noise(const SplitDataset& split, double ratio, Rng& rng) {
  if (!(ratio >= 0.0)) {
    throw std::invalid_argument("inject_noise: ratio must be non-negative");
  }
  SplitDataset noisy = split;
  auto& train = noisy.train;
  const auto count = static_cast<std::int64_t>(
      std::floor(ratio * static_cast<double>(train.num_pairs())));
  const Index num_items = train.num_items();

  // Per-basket membership over both sides, so fabricated items are new.
  std::vector<std::vector<char>> held(train.num_baskets());
  std::vector<Index> room(train.num_baskets(), 0);
  std::int64_t capacity = 0;
  for (Index b = 0; b < train.num_baskets(); ++b) {
    held[b].assign(num_items, 0);
    for (Index i : train.basket_items[b]) held[b][i] = 1;
    for (Index i : noisy.heldout[b]) held[b][i] = 1;
    room[b] = static_cast<Index>(
        num_items - std::count(held[b].begin(), held[b].end(), 1));
    if (!train.basket_items[b].empty()) capacity += room[b];
  }
  if (count > capacity) {
    throw DataError(fmt::format(
        "cannot add {} noisy pairs: only {} free basket slots", count,
        capacity));
  }
  std::vector<Index> baskets;
  for (Index b = 0; b < train.num_baskets(); ++b) {
    if (!train.basket_items[b].empty()) baskets.push_back(b);
  }
  for (std::int64_t n = 0; n < count; ++n) {
    Index b = baskets[rng.uniform_index(baskets.size())];
    while (room[b] == 0) b = baskets[rng.uniform_index(baskets.size())];
    Index item = static_cast<Index>(rng.uniform_index(num_items));
    while (held[b][item]) item = static_cast<Index>(rng.uniform_index(num_items));
    held[b][item] = 1;
    --room[b];
    train.basket_items[b].push_back(item);
  }
  return noisy;
}

MetricsReport train_and_evaluate(const SplitDataset& split,
                                 const TrainConfig& cfg,
                                 std::span<const std::size_t> ks) {
  Trainer trainer(split.train, cfg);
  fit(trainer);
  const auto cases = heldout_cases(split);
  return evaluate(inference_representations(trainer), cases, ks, cfg);
}

std::vector<NoiseRun> noise_sweep(const SplitDataset& split,
                                  const TrainConfig& cfg,
                                  std::span<const double> ratios,
                                  std::span<const std::uint64_t> seeds,
                                  std::span<const std::size_t> ks) {
  if (ratios.empty()) throw std::invalid_argument("noise_sweep: no ratios");
  std::vector<NoiseRun> runs;
  for (double ratio : ratios) {
    for (std::uint64_t seed : seeds) {
      Rng noise = Rng::stream(seed, "noise");
      const SplitDataset noisy = inject_noise(split, ratio, noise);
      for (std::string_view variant : {"full", "lightgcn-only"}) {
        TrainConfig run_cfg = cfg;
        run_cfg.seed = seed;
        if (variant != "full") apply_preset(run_cfg, variant);
        runs.push_back({ratio, seed, std::string(variant),
                        train_and_evaluate(noisy, run_cfg, ks)});
      }
    }
  }
  return runs;
}

double median_relative_degradation(std::span<const NoiseRun> runs,
                                   std::string_view variant, double ratio,
                                   std::size_t k) {
  std::vector<double> values;
  for (const auto& clean : runs) {
    if (clean.variant != variant || clean.ratio != 0.0) continue;
    const double base = clean.report.at(k).recall;
    if (base <= 0.0) continue;
    for (const auto& noisy : runs) {
      if (noisy.variant == variant && noisy.seed == clean.seed &&
          noisy.ratio == ratio) {
        values.push_back((base - noisy.report.at(k).recall) / base);
      }
    }
  }
  if (values.empty()) {
    throw std::invalid_argument(
        "median_relative_degradation: no clean/noisy pairs");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
}

std::string curve_tsv(std::span<const NoiseRun> runs) {
  std::string out = "ratio\tseed\tvariant\tk\trecall\tprecision\thit_ratio\tndcg\n";
  for (const auto& run : runs) {
    for (const auto& row : run.report.rows) {
      out += fmt::format("{}\t{}\t{}\t{}\t{:.10f}\t{:.10f}\t{:.10f}\t{:.10f}\n",
                         run.ratio, run.seed, run.variant, row.k, row.recall,
                         row.precision, row.hit_ratio, row.ndcg);
    }
  }
  return out;
}

}  // namespace basketrec
