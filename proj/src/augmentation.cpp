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

#include "basketrec/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace basketrec {

namespace {

double log_in(LogBase base, double x) {
  switch (base) {
    case LogBase::kTwo:
      return std::log2(x);
    case LogBase::kTen:
      return std::log10(x);
    case LogBase::kNatural:
      break;
  }
  return std::log(x);
}

void check_rate(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::invalid_argument("drop rate must lie in [0, 1)");
  }
}

}  // namespace

std::vector<double> EdgeImportance::scores() const {
  std::vector<double> out(argument.size());
  std::transform(argument.begin(), argument.end(), out.begin(),
                 [this](double x) { return log_in(base, x); });
  return out;
}

double importance_argument_ui(const BipartiteGraph& g,
                              const BasketHypergraph& hg, Index user,
                              Index item) {
  return clamped_degree(g.user_degree[user]) +
         clamped_degree(g.item_degree[item]) +
         clamped_degree(hg.item_degree[item]);
}

double importance_argument_bi(const BipartiteGraph& g,
                              const BasketHypergraph& hg, Index basket,
                              Index item) {
  return clamped_degree(hg.edge_degree[basket]) +
         clamped_degree(hg.item_degree[item]) +
         clamped_degree(g.item_degree[item]);
}

double edge_importance_ui(const BipartiteGraph& g, const BasketHypergraph& hg,
                          Index user, Index item, LogBase base) {
  return log_in(base, importance_argument_ui(g, hg, user, item));
}

double edge_importance_bi(const BipartiteGraph& g, const BasketHypergraph& hg,
                          Index basket, Index item, LogBase base) {
  return log_in(base, importance_argument_bi(g, hg, basket, item));
}

EdgeImportance importance_user_item(const BipartiteGraph& g,
                                    const BasketHypergraph& hg, LogBase base) {
  EdgeImportance out{GraphKind::kBipartite, base, {}};
  out.argument.reserve(g.edges.size());
  for (const auto& [u, i] : g.edges) {
    out.argument.push_back(importance_argument_ui(g, hg, u, i));
  }
  return out;
}

EdgeImportance importance_basket_item(const BipartiteGraph& g,
                                      const BasketHypergraph& hg,
                                      LogBase base) {
  EdgeImportance out{GraphKind::kHypergraph, base, {}};
  out.argument.reserve(hg.pins.size());
  for (const auto& [b, i] : hg.pins) {
    out.argument.push_back(importance_argument_bi(g, hg, b, i));
  }
  return out;
}

std::vector<double> drop_probabilities(std::span<const double> scores,
                                       double p) {
  check_rate(p);
  if (scores.empty()) throw std::invalid_argument("no edges to score");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double s_min = *lo;
  const double s_max = *hi;
  std::vector<double> probs(scores.size());
  if (s_max == s_min) {
    std::fill(probs.begin(), probs.end(), p / 2.0);
    return probs;
  }
  const double range = s_max - s_min;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    probs[e] = (s_max - scores[e]) / range * p;
  }
  return probs;
}

std::vector<double> drop_probabilities(const EdgeImportance& importance,
                                       double p) {
  EdgeImportance natural = importance;
  natural.base = LogBase::kNatural;
  const auto scores = natural.scores();
  return drop_probabilities(scores, p);
}

std::vector<char> sample_keep_mask(std::span<const double> probs, Rng& rng) {
  std::vector<char> keep(probs.size());
  for (std::size_t e = 0; e < probs.size(); ++e) {
    keep[e] = rng.uniform() < probs[e] ? 0 : 1;
  }
  return keep;
}

namespace {

std::vector<Edge> kept_edges(const std::vector<Edge>& edges,
                             const std::vector<char>& keep) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (keep[e]) out.push_back(edges[e]);
  }
  return out;
}

void check_aligned(std::size_t probs, std::size_t edges) {
  if (probs != edges) {
    throw std::invalid_argument(fmt::format(
        "{} drop probabilities for {} edges", probs, edges));
  }
}

}  // namespace

BipartiteView sample_view(const BipartiteGraph& source,
                          std::span<const double> probs, Rng& rng) {
  check_aligned(probs.size(), source.edges.size());
  BipartiteView view;
  view.keep = sample_keep_mask(probs, rng);
  view.graph = BipartiteGraph::from_edges(source.num_users, source.num_items,
                                          kept_edges(source.edges, view.keep));
  return view;
}

HypergraphView sample_view(const BasketHypergraph& source,
                           std::span<const double> probs, Rng& rng) {
  check_aligned(probs.size(), source.pins.size());
  HypergraphView view;
  view.keep = sample_keep_mask(probs, rng);
  view.graph = BasketHypergraph::from_pins(source.num_items, source.num_edges,
                                           kept_edges(source.pins, view.keep));
  return view;
}

BipartiteView random_view(const BipartiteGraph& source, double p, Rng& rng) {
  check_rate(p);
  const std::vector<double> probs(source.edges.size(), p);
  return sample_view(source, probs, rng);
}

HypergraphView random_view(const BasketHypergraph& source, double p,
                           Rng& rng) {
  check_rate(p);
  const std::vector<double> probs(source.pins.size(), p);
  return sample_view(source, probs, rng);
}

DropPlan consistency_aware_plan(const BipartiteGraph& g,
                                const BasketHypergraph& hg, double p) {
  DropPlan plan;
  if (!g.edges.empty()) {
    plan.user_item = drop_probabilities(importance_user_item(g, hg), p);
  }
  if (!hg.pins.empty()) {
    plan.basket_item = drop_probabilities(importance_basket_item(g, hg), p);
  }
  return plan;
}

DropPlan uniform_plan(const BipartiteGraph& g, const BasketHypergraph& hg,
                      double p) {
  check_rate(p);
  return {std::vector<double>(g.edges.size(), p),
          std::vector<double>(hg.pins.size(), p)};
}

void write_importance_table(std::ostream& out, const BipartiteGraph& g,
                            const BasketHypergraph& hg, double p) {
  const auto ui = importance_user_item(g, hg);
  const auto bi = importance_basket_item(g, hg);
  const auto ui_scores = ui.scores();
  const auto bi_scores = bi.scores();
  const auto plan = consistency_aware_plan(g, hg, p);
  out << "kind\tfirst\titem\tscore\tdrop_probability\n";
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out << fmt::format("user_item\t{}\t{}\t{:.10f}\t{:.10f}\n",
                       g.edges[e].first, g.edges[e].second, ui_scores[e],
                       plan.user_item[e]);
  }
  for (std::size_t e = 0; e < hg.pins.size(); ++e) {
    out << fmt::format("basket_item\t{}\t{}\t{:.10f}\t{:.10f}\n",
                       hg.pins[e].first, hg.pins[e].second, bi_scores[e],
                       plan.basket_item[e]);
  }
}

}  // namespace basketrec
