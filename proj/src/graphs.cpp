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

#include "basketrec/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "basketrec/errors.hpp"

namespace basketrec {

Csr make_csr(Index rows, std::span<const Edge> edges, bool by_first) {
  Csr csr;
  csr.offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
  for (const auto& e : edges) {
    ++csr.offsets[(by_first ? e.first : e.second) + 1];
  }
  for (Index r = 0; r < rows; ++r) csr.offsets[r + 1] += csr.offsets[r];
  csr.columns.resize(edges.size());
  csr.edge_ids.resize(edges.size());
  std::vector<std::int64_t> fill(csr.offsets.begin(), csr.offsets.end() - 1);
  // Edges arrive sorted by first, so both layouts end up with ascending
  // columns within each row.
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const Index r = by_first ? e.first : e.second;
    const std::int64_t slot = fill[r]++;
    csr.columns[slot] = by_first ? e.second : e.first;
    csr.edge_ids[slot] = static_cast<std::int64_t>(k);
  }
  return csr;
}

namespace {

void sort_unique(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<Index> row_degrees(const Csr& csr) {
  std::vector<Index> deg(csr.rows());
  for (Index r = 0; r < csr.rows(); ++r) {
    deg[r] = static_cast<Index>(csr.end(r) - csr.begin(r));
  }
  return deg;
}

void check_range(const std::vector<Edge>& edges, Index first, Index second) {
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= first || b < 0 || b >= second) {
      throw DataError("edge endpoint out of range");
    }
  }
}

}  // namespace

BipartiteGraph BipartiteGraph::from_edges(Index num_users, Index num_items,
                                          std::vector<Edge> edges) {
  sort_unique(edges);
  check_range(edges, num_users, num_items);
  BipartiteGraph g;
  g.num_users = num_users;
  g.num_items = num_items;
  g.edges = std::move(edges);
  g.user_adj = make_csr(num_users, g.edges, true);
  g.item_adj = make_csr(num_items, g.edges, false);
  g.user_degree = row_degrees(g.user_adj);
  g.item_degree = row_degrees(g.item_adj);
  g.norm_coeff.resize(g.edges.size());
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto [u, i] = g.edges[k];
    g.norm_coeff[k] = 1.0 / std::sqrt(clamped_degree(g.user_degree[u]) *
                                      clamped_degree(g.item_degree[i]));
  }
  return g;
}

BasketHypergraph BasketHypergraph::from_pins(Index num_items, Index num_edges,
                                             std::vector<Edge> pins) {
  sort_unique(pins);
  check_range(pins, num_edges, num_items);
  BasketHypergraph hg;
  hg.num_items = num_items;
  hg.num_edges = num_edges;
  hg.pins = std::move(pins);
  hg.by_edge = make_csr(num_edges, hg.pins, true);
  hg.by_item = make_csr(num_items, hg.pins, false);
  hg.edge_degree = row_degrees(hg.by_edge);
  hg.item_degree = row_degrees(hg.by_item);
  return hg;
}

BipartiteGraph build_user_item_graph(const InteractionDataset& ds) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(ds.num_pairs()));
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    for (Index i : ds.basket_items[b]) edges.emplace_back(ds.basket_owner[b], i);
  }
  return BipartiteGraph::from_edges(ds.num_users(), ds.num_items(),
                                    std::move(edges));
}

BasketHypergraph build_basket_hypergraph(const InteractionDataset& ds) {
  std::vector<Edge> pins;
  pins.reserve(static_cast<std::size_t>(ds.num_pairs()));
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    for (Index i : ds.basket_items[b]) pins.emplace_back(b, i);
  }
  return BasketHypergraph::from_pins(ds.num_items(), ds.num_baskets(),
                                     std::move(pins));
}

void write_degree_histogram(std::ostream& out, const BipartiteGraph& g,
                            const BasketHypergraph& hg) {
  auto dump = [&out](const char* side, const std::vector<Index>& degrees) {
    std::map<Index, std::int64_t> counts;
    for (Index d : degrees) ++counts[d];
    for (const auto& [degree, count] : counts) {
      out << side << '\t' << degree << '\t' << count << '\n';
    }
  };
  out << "side\tdegree\tcount\n";
  dump("user", g.user_degree);
  dump("item", g.item_degree);
  dump("hyper_item", hg.item_degree);
  dump("hyper_basket", hg.edge_degree);
}

}  // namespace basketrec
