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

#include <array>
#include <span>
#include <vector>

#include "basketrec/config.hpp"
#include "basketrec/graphs.hpp"
#include "basketrec/objectives.hpp"
#include "basketrec/rng.hpp"
#include "basketrec/types.hpp"

namespace basketrec {

// Learnable base tables. The item table feeds both views unless
// `item_basket` is non-empty, in which case the hypergraph starts from it.
struct Parameters {
  Matrix user;
  Matrix item;
  Matrix item_basket;

  bool shared_item_base() const { return item_basket.size() == 0; }
  const Matrix& hypergraph_input() const {
    return shared_item_base() ? item : item_basket;
  }
};

// Xavier-uniform tables with fan_in = fan_out = dim.
Parameters init_params(Index num_users, Index num_items,
                       const TrainConfig& cfg, Rng& rng);

// The pair of graphs a forward pass runs on (original or augmented).
struct GraphViews {
  const BipartiteGraph* user_item = nullptr;
  const BasketHypergraph* basket = nullptr;
};

// Final pooled representations. `item_basket` is zero when the hypergraph
// view is disabled; `fused` = item_user + item_basket.
struct Representations {
  Matrix user;
  Matrix item_user;
  Matrix item_basket;
  Matrix fused;
};

Representations encode(const GraphViews& graphs, const Parameters& params,
                       int layers, bool use_hypergraph);

// Embedding of a training basket on a given hypergraph: the mean of its
// members' basket-view rows. An augmented basket that lost every member
// falls back to its members in `fallback`.
RowVector training_basket_embedding(const Representations& reps,
                                    const BasketHypergraph& graph,
                                    const BasketHypergraph& fallback,
                                    Index basket);

struct Gradients {
  Matrix user;
  Matrix item;
  Matrix item_basket;

  static Gradients zeros_like(const Parameters& params);
};

struct BatchLoss {
  double main = 0.0;
  double cross = 0.0;
  double within = 0.0;
  double total = 0.0;
  std::array<double, 4> within_terms{};
};

// Sorted distinct ids of each entity class in a batch.
struct BatchEntities {
  std::vector<Index> users;
  std::vector<Index> items;  // positives and negatives
  std::vector<Index> baskets;
};
BatchEntities batch_entities(std::span<const BprTriple> triples);

// Multi-task loss of one batch:
//   main + alpha_cross * cross_behavior + alpha_within * within_behavior
// `augmented` may be null when no contrastive term is active, or alias the
// original graphs. When `grads` is set it receives the exact gradient with
// respect to every base table. A non-finite main loss returns early with
// total = main and no contrastive terms.
BatchLoss batch_objective(const Parameters& params,
                          const GraphViews& original,
                          const GraphViews* augmented,
                          std::span<const BprTriple> triples,
                          const TrainConfig& cfg, Gradients* grads);

}  // namespace basketrec
