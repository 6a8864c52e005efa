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

#include "basketrec/propagation.hpp"

#include <cmath>
#include <stdexcept>

namespace basketrec {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void apply_bipartite(const BipartiteGraph& g, const Matrix& user_in,
                     const Matrix& item_in, Matrix& user_out,
                     Matrix& item_out) {
  require(user_in.rows() == g.num_users && item_in.rows() == g.num_items,
          "bipartite propagation: table rows do not match graph");
  require(user_in.cols() == item_in.cols(),
          "bipartite propagation: embedding widths differ");
  user_out.setZero(g.num_users, user_in.cols());
  item_out.setZero(g.num_items, item_in.cols());
  for (Index u = 0; u < g.num_users; ++u) {
    auto out = user_out.row(u);
    for (auto k = g.user_adj.begin(u); k < g.user_adj.end(u); ++k) {
      out += g.norm_coeff[g.user_adj.edge_ids[k]] *
             item_in.row(g.user_adj.columns[k]);
    }
  }
  for (Index i = 0; i < g.num_items; ++i) {
    auto out = item_out.row(i);
    for (auto k = g.item_adj.begin(i); k < g.item_adj.end(i); ++k) {
      out += g.norm_coeff[g.item_adj.edge_ids[k]] *
             user_in.row(g.item_adj.columns[k]);
    }
  }
}

void apply_hypergraph(const BasketHypergraph& hg, const Matrix& in,
                      Matrix& out) {
  require(in.rows() == hg.num_items,
          "hypergraph propagation: table rows do not match graph");
  const auto d = in.cols();
  std::vector<double> inv_sqrt_deg(hg.num_items);
  for (Index i = 0; i < hg.num_items; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(clamped_degree(hg.item_degree[i]));
  }
  // Gather: each hyperedge averages its D^{-1/2}-scaled members.
  Matrix edge_sum = Matrix::Zero(hg.num_edges, d);
  for (Index b = 0; b < hg.num_edges; ++b) {
    auto acc = edge_sum.row(b);
    for (Index i : hg.by_edge.row(b)) acc += inv_sqrt_deg[i] * in.row(i);
    acc /= clamped_degree(hg.edge_degree[b]);
  }
  // Scatter back to the vertices.
  out.setZero(hg.num_items, d);
  for (Index i = 0; i < hg.num_items; ++i) {
    auto acc = out.row(i);
    for (Index b : hg.by_item.row(i)) acc += edge_sum.row(b);
    acc *= inv_sqrt_deg[i];
  }
}

BipartiteLayers propagate_bipartite(const BipartiteGraph& g,
                                    const Matrix& user_base,
                                    const Matrix& item_base, int layers) {
  require(layers >= 1, "propagation needs at least one layer");
  BipartiteLayers out;
  out.user.reserve(layers + 1);
  out.item.reserve(layers + 1);
  out.user.push_back(user_base);
  out.item.push_back(item_base);
  for (int k = 1; k <= layers; ++k) {
    Matrix u, i;
    apply_bipartite(g, out.user.back(), out.item.back(), u, i);
    out.user.push_back(std::move(u));
    out.item.push_back(std::move(i));
  }
  return out;
}

std::vector<Matrix> propagate_hypergraph(const BasketHypergraph& hg,
                                         const Matrix& item_base, int layers) {
  require(layers >= 1, "propagation needs at least one layer");
  std::vector<Matrix> out;
  out.reserve(layers + 1);
  out.push_back(item_base);
  for (int k = 1; k <= layers; ++k) {
    Matrix next;
    apply_hypergraph(hg, out.back(), next);
    out.push_back(std::move(next));
  }
  return out;
}

Matrix pool_layers(std::span<const Matrix> layers) {
  require(!layers.empty(), "pool_layers: no layers");
  Matrix sum = layers.front();
  for (std::size_t k = 1; k < layers.size(); ++k) {
    require(layers[k].rows() == sum.rows() && layers[k].cols() == sum.cols(),
            "pool_layers: layer shapes differ");
    sum += layers[k];
  }
  sum /= static_cast<double>(layers.size());
  return sum;
}

RowVector basket_embedding(const Matrix& item_table,
                           std::span<const Index> items) {
  require(!items.empty(), "basket_embedding: empty item list");
  RowVector sum = RowVector::Zero(item_table.cols());
  for (Index i : items) sum += item_table.row(i);
  sum /= static_cast<double>(items.size());
  return sum;
}

void adjoint_bipartite(const BipartiteGraph& g,
                       std::span<const Matrix> user_grads,
                       std::span<const Matrix> item_grads,
                       Matrix& user_base_grad, Matrix& item_base_grad) {
  require(!user_grads.empty() && user_grads.size() == item_grads.size(),
          "adjoint_bipartite: gradient layer counts differ");
  // Horner form of sum_k (A^T)^k G_k.
  Matrix acc_user = user_grads.back();
  Matrix acc_item = item_grads.back();
  Matrix next_user, next_item;
  for (std::size_t k = user_grads.size() - 1; k-- > 0;) {
    apply_bipartite(g, acc_user, acc_item, next_user, next_item);
    acc_user = next_user + user_grads[k];
    acc_item = next_item + item_grads[k];
  }
  user_base_grad = std::move(acc_user);
  item_base_grad = std::move(acc_item);
}

Matrix adjoint_hypergraph(const BasketHypergraph& hg,
                          std::span<const Matrix> layer_grads) {
  require(!layer_grads.empty(), "adjoint_hypergraph: no gradients");
  Matrix acc = layer_grads.back();
  Matrix next;
  for (std::size_t k = layer_grads.size() - 1; k-- > 0;) {
    apply_hypergraph(hg, acc, next);
    acc = next + layer_grads[k];
  }
  return acc;
}

void adjoint_bipartite_pooled(const BipartiteGraph& g, const Matrix& user_grad,
                              const Matrix& item_grad, int layers,
                              Matrix& user_base_grad, Matrix& item_base_grad) {
  require(layers >= 1, "propagation needs at least one layer");
  const double scale = 1.0 / static_cast<double>(layers + 1);
  std::vector<Matrix> ug(layers + 1, user_grad * scale);
  std::vector<Matrix> ig(layers + 1, item_grad * scale);
  adjoint_bipartite(g, ug, ig, user_base_grad, item_base_grad);
}

Matrix adjoint_hypergraph_pooled(const BasketHypergraph& hg,
                                 const Matrix& item_grad, int layers) {
  require(layers >= 1, "propagation needs at least one layer");
  const double scale = 1.0 / static_cast<double>(layers + 1);
  std::vector<Matrix> grads(layers + 1, item_grad * scale);
  return adjoint_hypergraph(hg, grads);
}

}  // namespace basketrec
