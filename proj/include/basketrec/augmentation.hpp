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

#include <iosfwd>
#include <span>
#include <vector>

#include "basketrec/graphs.hpp"
#include "basketrec/rng.hpp"

namespace basketrec {

enum class LogBase { kNatural, kTwo, kTen };

enum class GraphKind { kBipartite, kHypergraph };

// Consistency-aware importance of every edge of one graph. The score of an
// edge is log(argument), where the argument sums three degrees taken from
// both views:
//   user-item edge:   deg(u) + deg(i) + hyper_deg(i)
//   basket-item pin:  hyper_deg(b) + hyper_deg(i) + deg(i)
// Degrees below one are clamped to one.
struct EdgeImportance {
  GraphKind graph = GraphKind::kBipartite;
  LogBase base = LogBase::kNatural;
  std::vector<double> argument;  // aligned with the source edge list

  std::vector<double> scores() const;
};

double importance_argument_ui(const BipartiteGraph& g,
                              const BasketHypergraph& hg, Index user,
                              Index item);
double importance_argument_bi(const BipartiteGraph& g,
                              const BasketHypergraph& hg, Index basket,
                              Index item);

double edge_importance_ui(const BipartiteGraph& g, const BasketHypergraph& hg,
                          Index user, Index item,
                          LogBase base = LogBase::kNatural);
double edge_importance_bi(const BipartiteGraph& g, const BasketHypergraph& hg,
                          Index basket, Index item,
                          LogBase base = LogBase::kNatural);

EdgeImportance importance_user_item(const BipartiteGraph& g,
                                    const BasketHypergraph& hg,
                                    LogBase base = LogBase::kNatural);
EdgeImportance importance_basket_item(const BipartiteGraph& g,
                                      const BasketHypergraph& hg,
                                      LogBase base = LogBase::kNatural);

// p_e = (s_max - s_e) / (s_max - s_min) * p. When all scores are equal every
// edge gets p / 2.
std::vector<double> drop_probabilities(std::span<const double> scores,
                                       double p);

// Affine normalization cancels the log base, so probabilities are computed
// from the natural log of the stored arguments for any `base`.
std::vector<double> drop_probabilities(const EdgeImportance& importance,
                                       double p);

// One Bernoulli draw per edge, in edge order: edge e is kept with
// probability 1 - probs[e].
std::vector<char> sample_keep_mask(std::span<const double> probs, Rng& rng);

struct BipartiteView {
  std::vector<char> keep;
  BipartiteGraph graph;
};

struct HypergraphView {
  std::vector<char> keep;
  BasketHypergraph graph;
};

BipartiteView sample_view(const BipartiteGraph& source,
                          std::span<const double> probs, Rng& rng);
HypergraphView sample_view(const BasketHypergraph& source,
                           std::span<const double> probs, Rng& rng);

// Uniform edge dropping with rate p; no importance is consulted.
BipartiteView random_view(const BipartiteGraph& source, double p, Rng& rng);
HypergraphView random_view(const BasketHypergraph& source, double p, Rng& rng);

// Drop probabilities for both views, computed once from the unaugmented
// training graphs.
struct DropPlan {
  std::vector<double> user_item;
  std::vector<double> basket_item;
};

DropPlan consistency_aware_plan(const BipartiteGraph& g,
                                const BasketHypergraph& hg, double p);
DropPlan uniform_plan(const BipartiteGraph& g, const BasketHypergraph& hg,
                      double p);

// "kind<TAB>first<TAB>item<TAB>score<TAB>drop_probability" rows.
void write_importance_table(std::ostream& out, const BipartiteGraph& g,
                            const BasketHypergraph& hg, double p);

}  // namespace basketrec
