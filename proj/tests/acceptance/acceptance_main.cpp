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

// Acceptance suite: one PASS/FAIL line per criterion. Criterion 10 needs the
// Instacart files (BASKETREC_INSTACART_ITEMS, BASKETREC_INSTACART_ORDERS) and
// does not gate the exit status.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "basketrec/augmentation.hpp"
#include "basketrec/evaluation.hpp"
#include "basketrec/graphs.hpp"
#include "basketrec/propagation.hpp"
#include "basketrec/synthetic.hpp"
#include "basketrec/trainer.hpp"
#include "support/oracles.hpp"
#include "support/pipelines.hpp"

namespace fs = std::filesystem;
using namespace basketrec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(gen);
  return m;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Outcome operator_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240101);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto ds = oracle::random_dataset(gen, 20, 30, 20);
    const int layers = 1 + t % 3;
    const Matrix users = random_matrix(gen, ds.num_users(), 4);
    const Matrix items = random_matrix(gen, ds.num_items(), 4);
    const auto bip = propagate_bipartite(build_user_item_graph(ds), users, items, layers);
    const Matrix got = stack(pool_layers(bip.user), pool_layers(bip.item));
    const Matrix want = oracle::dense_pooled(oracle::dense_bipartite_operator(ds),
                                             stack(users, items), layers);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
    const Matrix hyper =
        pool_layers(propagate_hypergraph(build_basket_hypergraph(ds), items, layers));
    const Matrix hyper_want =
        oracle::dense_pooled(oracle::dense_hypergraph_operator(ds), items, layers);
    worst = std::max(worst, (hyper - hyper_want).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(start);
  return {worst < 1e-10 && secs < 10.0,
          fmt::format("200 instances, max abs error {:.3e}, {:.2f}s", worst, secs)};
}

Outcome fixed_points() {
  std::mt19937_64 gen(20240102);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto ds = oracle::random_dataset(gen, 20, 30, 20);
    const Eigen::VectorXd s = oracle::sqrt_bipartite_degrees(ds);
    const Matrix su = s.head(ds.num_users());
    const Matrix si = s.tail(ds.num_items());
    Matrix u, i;
    apply_bipartite(build_user_item_graph(ds), su, si, u, i);
    worst = std::max({worst, (u - su).cwiseAbs().maxCoeff(),
                      (i - si).cwiseAbs().maxCoeff()});
    const Matrix h = oracle::sqrt_item_hyperdegrees(ds);
    Matrix out;
    apply_hypergraph(build_basket_hypergraph(ds), h, out);
    worst = std::max(worst, (out - h).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, fmt::format("200 instances, max error {:.3e}", worst)};
}

Outcome gradient_check() {
  const auto start = std::chrono::steady_clock::now();
  const auto ds = oracle::gradient_toy();
  const auto g = build_user_item_graph(ds);
  const auto hg = build_basket_hypergraph(ds);
  const std::vector<BprTriple> triples = {{0, 0, 1, 5}, {1, 1, 3, 0}, {2, 2, 5, 7},
                                          {3, 3, 4, 2}, {0, 0, 2, 6}, {1, 1, 4, 7}};
  double worst = 0.0;
  for (bool shared : {true, false}) {
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.layers = 1;
    cfg.drop_rate = 0.4;
    cfg.alpha_cross = 0.3;
    cfg.alpha_within = 0.2;
    cfg.l2 = 0.01;
    cfg.balance = 0.3;
    cfg.shared_item_base = shared;
    Rng aug = Rng::stream(3, "augment");
    const auto plan = consistency_aware_plan(g, hg, cfg.drop_rate);
    const auto ag = sample_view(g, plan.user_item, aug);
    const auto ahg = sample_view(hg, plan.basket_item, aug);
    const GraphViews original{&g, &hg}, augmented{&ag.graph, &ahg.graph};
    Rng init = Rng::stream(1, "init");
    Parameters p = init_params(5, 8, cfg, init);
    Gradients grads;
    const auto loss = batch_objective(p, original, &augmented, triples, cfg, &grads);
    if (!(loss.cross > 0.0 && loss.within > 0.0)) return {false, "inactive component"};
    auto f = [&] {
      return batch_objective(p, original, &augmented, triples, cfg, nullptr).total;
    };
    worst = std::max(worst, oracle::max_relative_error(
                                grads.user, oracle::central_difference(p.user, f, 1e-6), 1e-6));
    worst = std::max(worst, oracle::max_relative_error(
                                grads.item, oracle::central_difference(p.item, f, 1e-6), 1e-6));
    if (!shared) {
      worst = std::max(worst, oracle::max_relative_error(
                                  grads.item_basket,
                                  oracle::central_difference(p.item_basket, f, 1e-6), 1e-6));
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 30.0,
          fmt::format("max relative error {:.3e}, {:.2f}s", worst, secs)};
}

Outcome metric_oracles() {
  using Ids = std::vector<Index>;
  std::mt19937_64 gen(20240104);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(2, 50)(gen);
    Ids items(n);
    std::iota(items.begin(), items.end(), 0);
    std::shuffle(items.begin(), items.end(), gen);
    const Ids ranked(items.begin(),
                     items.begin() + std::uniform_int_distribution<int>(1, n)(gen));
    std::shuffle(items.begin(), items.end(), gen);
    Ids truth(items.begin(), items.begin() + std::uniform_int_distribution<int>(1, n)(gen));
    std::sort(truth.begin(), truth.end());
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n + 5)(gen);
    worst = std::max({worst,
                      std::abs(recall_at_k(ranked, truth, k) - oracle::brute_recall(ranked, truth, k)),
                      std::abs(precision_at_k(ranked, truth, k) -
                               oracle::brute_precision(ranked, truth, k)),
                      std::abs(hit_at_k(ranked, truth, k) - oracle::brute_hit(ranked, truth, k)),
                      std::abs(ndcg_at_k(ranked, truth, k) - oracle::brute_ndcg(ranked, truth, k))});
  }
  const bool first = recall_at_k(Ids{0, 1}, Ids{0}, 2) == 1.0 &&
                     precision_at_k(Ids{0, 1}, Ids{0}, 2) == 0.5 &&
                     hit_at_k(Ids{0, 1}, Ids{0}, 2) == 1.0 &&
                     ndcg_at_k(Ids{0, 1}, Ids{0}, 2) == 1.0;
  const double second = ndcg_at_k(Ids{1, 0}, Ids{0}, 2);
  const double third = ndcg_at_k(Ids{0, 1, 2}, Ids{0, 2}, 3);
  const bool hand = first && second == 1.0 / std::log2(3.0) &&
                    third == 1.5 / (1.0 + 1.0 / std::log2(3.0)) &&
                    std::abs(second - 0.6309298) < 1e-7 && std::abs(third - 0.9197208) < 1e-7;
  return {worst <= 1e-12 && hand,
          fmt::format("1000 instances, max deviation {:.3e}; hand examples {} "
                      "(ndcg {:.6f}, {:.6f})",
                      worst, hand ? "exact" : "MISMATCH", second, third)};
}

Outcome augmentation_statistics() {
  const std::vector<double> scores = {0.3, 1.1, 1.7, 2.2, 2.9, 3.4, 4.0};
  const double p = 0.5;
  const auto probs = drop_probabilities(scores, p);
  Rng rng = Rng::stream(20240105, "augment");
  const int draws = 10000;
  std::vector<int> dropped(scores.size(), 0);
  for (int d = 0; d < draws; ++d) {
    const auto keep = sample_keep_mask(probs, rng);
    for (std::size_t e = 0; e < keep.size(); ++e) dropped[e] += keep[e] ? 0 : 1;
  }
  double worst_sigma = 0.0;
  for (std::size_t e = 0; e + 1 < scores.size(); ++e) {
    const double sigma = std::sqrt(draws * probs[e] * (1 - probs[e]));
    worst_sigma = std::max(worst_sigma, std::abs(dropped[e] - draws * probs[e]) / sigma);
  }
  const bool max_kept = dropped.back() == 0;

  std::mt19937_64 gen(20240105);
  bool identical = true;
  for (int t = 0; t < 50; ++t) {
    const auto ds = oracle::random_dataset(gen, 20, 30, 20);
    const auto g = build_user_item_graph(ds);
    const auto hg = build_basket_hypergraph(ds);
    for (LogBase base : {LogBase::kTwo, LogBase::kTen}) {
      identical &= drop_probabilities(importance_user_item(g, hg, base), p) ==
                   drop_probabilities(importance_user_item(g, hg), p);
      identical &= drop_probabilities(importance_basket_item(g, hg, base), p) ==
                   drop_probabilities(importance_basket_item(g, hg), p);
    }
  }
  return {worst_sigma <= 3.0 && max_kept && identical,
          fmt::format("worst deviation {:.2f} sigma, max-importance drops {}, "
                      "log bases bit-identical: {}",
                      worst_sigma, dropped.back(), identical ? "yes" : "no")};
}

Outcome ablation_reduction() {
  const auto split = split_within_basket(planted_blocks({}, 6), 0.8, 6);
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 10;
  cfg.batch_size = 256;
  cfg.learning_rate = 0.05;
  apply_preset(cfg, "lightgcn-only");
  Trainer trainer(split.train, cfg);
  fit(trainer);
  const auto reps = inference_representations(trainer);
  const Matrix got = reps.user * reps.fused.transpose();
  const Matrix want = oracle::bipartite_bpr_scores(split.train, cfg);
  // Also the ranking path: its query must reduce to the user row.
  double rank_gap = 0.0;
  for (const auto& c : heldout_cases(split)) {
    const auto r = rank_items(reps, c.user, c.partial,
                              score_mix(cfg.balance, cfg.additive_score), 5);
    for (Index i : r.ranked) {
      rank_gap = std::max(rank_gap,
                          std::abs(reps.user.row(c.user).dot(reps.fused.row(i)) - want(c.user, i)));
    }
  }
  const double gap = (got - want).cwiseAbs().maxCoeff();
  return {gap < 1e-10 && rank_gap < 1e-10,
          fmt::format("max score gap {:.3e}, ranked-score gap {:.3e}", gap, rank_gap)};
}

TrainConfig synthetic_config() {
  TrainConfig cfg;  // every component on
  cfg.learning_rate = 0.5;
  return cfg;
}

Outcome memorization() {
  const auto start = std::chrono::steady_clock::now();
  const auto split = split_within_basket(planted_blocks({}, 7), 0.8, 7);
  TrainConfig cfg = synthetic_config();
  cfg.epochs = 500;
  Trainer trainer(merge_split(split), cfg);
  const auto cases = heldout_cases(split);
  const std::vector<std::size_t> ks = {5};
  double recall = 0.0;
  int reached = -1;
  while (trainer.epoch() < cfg.epochs) {
    trainer.train_epoch();
    if (trainer.epoch() % 25 == 0) {
      recall = evaluate(inference_representations(trainer), cases, ks, cfg).rows[0].recall;
      if (recall == 1.0) {
        reached = trainer.epoch();
        break;
      }
    }
  }
  const double secs = seconds_since(start);
  return {reached > 0 && secs < 120.0,
          fmt::format("Recall@5 {:.4f} on training positives{}, {:.1f}s", recall,
                      reached > 0 ? fmt::format(" at epoch {}", reached) : "", secs)};
}

Outcome noise_trend() {
  // 6-item baskets split 50/50 leave 3 heldout items per basket.
  const auto split = split_within_basket(planted_blocks({}, 7), 0.5, 7);
  TrainConfig cfg = synthetic_config();
  cfg.epochs = 300;
  const std::vector<double> ratios = {0.0, 0.4, 0.8};
  const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  const std::vector<std::size_t> ks = {20};
  const auto runs = noise_sweep(split, cfg, ratios, seeds, ks);
  bool pass = true;
  std::string detail;
  for (double r : {0.4, 0.8}) {
    const double full = median_relative_degradation(runs, "full", r, 20);
    const double base = median_relative_degradation(runs, "lightgcn-only", r, 20);
    pass &= full <= base;
    detail += fmt::format("ratio {}: full {:.4f} vs lightgcn-only {:.4f}; ", r, full, base);
  }
  detail.resize(detail.size() - 2);
  return {pass, "median relative Recall@20 drop, " + detail};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "basketrec_acceptance_determinism";
  fs::remove_all(root);
  const std::string cli = BASKETREC_CLI;
  const std::string sample =
      (fs::path(BASKETREC_SOURCE_DIR) / "data/sample_transactions.csv").string();
  std::string outputs[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = root / std::to_string(k);
    const std::string quiet = " > /dev/null 2>&1";
    if (shell(cli + " prepare " + sample + " --min-basket-size 3 --seed 7 --out " +
              (dir / "prep").string() + quiet) != 0 ||
        shell(cli + " train --split " + (dir / "prep/split.txt").string() +
              " --seed 7 --set dim=16 --set epochs=20 --set learning_rate=0.05 --out " +
              (dir / "train").string() + quiet) != 0 ||
        shell(cli + " evaluate --checkpoint " + (dir / "train/checkpoint.bin").string() +
              " --split " + (dir / "prep/split.txt").string() + " --out " +
              (dir / "eval").string() + quiet) != 0) {
      return {false, "a pipeline command failed"};
    }
    outputs[k] = slurp(dir / "eval/metrics.tsv") + slurp(dir / "eval/metrics.json");
  }
  fs::remove_all(root);
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
  return {same, fmt::format("two prepare/train/evaluate runs, metrics files {}",
                            same ? "byte-identical" : "DIFFER")};
}

std::optional<Outcome> instacart_stats() {
  const char* items = std::getenv("BASKETREC_INSTACART_ITEMS");
  const char* orders = std::getenv("BASKETREC_INSTACART_ORDERS");
  if (!items || !orders) return std::nullopt;
  std::vector<fs::path> paths;
  std::istringstream list(items);
  for (std::string p; std::getline(list, p, ':');) paths.emplace_back(p);
  const auto raw = load_transactions(paths, {}, fs::path(orders));
  const auto stats = compute_stats(filter_baskets(raw, 30));
  const bool pass = stats.num_users == 22168 && stats.num_items == 40044 &&
                    fmt::format("{:.2f}", stats.mean_basket_size) == "37.00" &&
                    fmt::format("{:.2f}", stats.mean_baskets_per_user) == "2.96";
  return Outcome{pass, fmt::format("users {} items {} basket size {:.2f} baskets/user {:.2f}",
                                   stats.num_users, stats.num_items,
                                   stats.mean_basket_size, stats.mean_baskets_per_user)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> gating = {
      {"operator oracle equivalence", operator_oracles},
      {"fixed-point invariants", fixed_points},
      {"gradient correctness", gradient_check},
      {"metric oracles", metric_oracles},
      {"augmentation statistics", augmentation_statistics},
      {"ablation reduction", ablation_reduction},
      {"memorization", memorization},
      {"noise-robustness trend", noise_trend},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t c = 0; c < gating.size(); ++c) {
    Outcome outcome;
    try {
      outcome = gating[c].second();
    } catch (const std::exception& e) {
      outcome = {false, fmt::format("threw: {}", e.what())};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << fmt::format("criterion {} {}: {} ({})", c + 1, gating[c].first,
                             outcome.pass ? "PASS" : "FAIL", outcome.detail)
              << std::endl;
  }
  try {
    if (auto outcome = instacart_stats()) {
      std::cout << fmt::format("criterion 10 full-data statistics: {} ({}, not gating)",
                               outcome->pass ? "PASS" : "FAIL", outcome->detail)
                << std::endl;
    } else {
      std::cout << "criterion 10 full-data statistics: SKIP (Instacart files not "
                   "supplied, not gating)"
                << std::endl;
    }
  } catch (const std::exception& e) {
    std::cout << fmt::format("criterion 10 full-data statistics: FAIL (threw: {}, not gating)",
                             e.what())
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
