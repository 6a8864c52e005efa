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

#include <span>
#include <vector>

#include "basketrec/graphs.hpp"
#include "basketrec/types.hpp"

namespace basketrec {

// Light (linear, parameter-free) message passing on both views.
//
// Bipartite round, with c(u,i) = 1 / sqrt(deg(u) deg(i)):
//   user_out(u) = sum_{i in N(u)} c(u,i) item_in(i)
//   item_out(i) = sum_{u in N(i)} c(u,i) user_in(u)
// Hypergraph round:
//   out = D^{-1/2} H B^{-1} H^T D^{-1/2} in
// Both operators are symmetric, so each is its own adjoint. Rows are
// accumulated in ascending neighbor order, which makes every result
// deterministic.

struct BipartiteLayers {
  std::vector<Matrix> user;  // k = 0..K
  std::vector<Matrix> item;
};

void apply_bipartite(const BipartiteGraph& g, const Matrix& user_in,
                     const Matrix& item_in, Matrix& user_out,
                     Matrix& item_out);

void apply_hypergraph(const BasketHypergraph& hg, const Matrix& in,
                      Matrix& out);

BipartiteLayers propagate_bipartite(const BipartiteGraph& g,
                                    const Matrix& user_base,
                                    const Matrix& item_base, int layers);

std::vector<Matrix> propagate_hypergraph(const BasketHypergraph& hg,
                                         const Matrix& item_base, int layers);

// Mean over all supplied layers (k = 0..K, i.e. K + 1 terms).
Matrix pool_layers(std::span<const Matrix> layers);

// Mean of the rows of `item_table` listed in `items`.
RowVector basket_embedding(const Matrix& item_table,
                           std::span<const Index> items);

// Gradient with respect to the layer-0 inputs given the gradient of every
// layer output (index k receives dLoss/dLayer_k).
void adjoint_bipartite(const BipartiteGraph& g,
                       std::span<const Matrix> user_grads,
                       std::span<const Matrix> item_grads, Matrix& user_base_grad,
                       Matrix& item_base_grad);

Matrix adjoint_hypergraph(const BasketHypergraph& hg,
                          std::span<const Matrix> layer_grads);

// Same as above for a loss that only sees the pooled output.
void adjoint_bipartite_pooled(const BipartiteGraph& g, const Matrix& user_grad,
                              const Matrix& item_grad, int layers,
                              Matrix& user_base_grad, Matrix& item_base_grad);

Matrix adjoint_hypergraph_pooled(const BasketHypergraph& hg,
                                 const Matrix& item_grad, int layers);

}  // namespace basketrec
