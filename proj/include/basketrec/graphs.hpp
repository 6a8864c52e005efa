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
#include <utility>
#include <vector>

#include "basketrec/dataset.hpp"
#include "basketrec/types.hpp"

namespace basketrec {

// Compressed sparse rows over an edge list. Each stored entry carries the
// position of its edge so per-edge values can be looked up in either
// orientation.
struct Csr {
  std::vector<std::int64_t> offsets;  // rows + 1
  std::vector<Index> columns;
  std::vector<std::int64_t> edge_ids;

  Index rows() const { return static_cast<Index>(offsets.size()) - 1; }
  std::int64_t begin(Index r) const { return offsets[r]; }
  std::int64_t end(Index r) const { return offsets[r + 1]; }
  std::span<const Index> row(Index r) const {
    return {columns.data() + offsets[r],
            static_cast<std::size_t>(offsets[r + 1] - offsets[r])};
  }
};

// First element indexes the rows of the edge list (user or basket), the
// second the item.
using Edge = std::pair<Index, Index>;

// Builds a CSR by rows (`by_first`) or by columns from a sorted edge list.
Csr make_csr(Index rows, std::span<const Edge> edges, bool by_first);

// Degree used for normalization: isolated nodes count as degree one.
inline double clamped_degree(Index degree) {
  return degree < 1 ? 1.0 : static_cast<double>(degree);
}

// User-item interaction graph. Edges are unique and sorted by (user, item);
// each edge is stored once and indexed from both sides.
struct BipartiteGraph {
  Index num_users = 0;
  Index num_items = 0;
  std::vector<Edge> edges;
  Csr user_adj;
  Csr item_adj;
  std::vector<Index> user_degree;
  std::vector<Index> item_degree;
  // 1 / sqrt(deg(u) * deg(i)) per edge
  std::vector<double> norm_coeff;

  std::int64_t num_edges() const { return std::ssize(edges); }

  // Sorts and deduplicates `edges`.
  static BipartiteGraph from_edges(Index num_users, Index num_items,
                                   std::vector<Edge> edges);
};

// Items are vertices, baskets are hyperedges. `pins` lists (basket, item)
// incidences sorted by basket then item.
struct BasketHypergraph {
  Index num_items = 0;
  Index num_edges = 0;
  std::vector<Edge> pins;
  Csr by_edge;  // rows of H^T: basket -> member items
  Csr by_item;  // rows of H: item -> containing baskets
  std::vector<Index> item_degree;
  std::vector<Index> edge_degree;

  std::int64_t num_pins() const { return std::ssize(pins); }
  std::span<const Index> members(Index basket) const {
    return by_edge.row(basket);
  }

  static BasketHypergraph from_pins(Index num_items, Index num_edges,
                                    std::vector<Edge> pins);
};

// Edge (u, i) for every item in any of u's baskets.
BipartiteGraph build_user_item_graph(const InteractionDataset& ds);

// One hyperedge per basket holding exactly its items.
BasketHypergraph build_basket_hypergraph(const InteractionDataset& ds);

// Debug dump: "side<TAB>degree<TAB>count" rows.
void write_degree_histogram(std::ostream& out, const BipartiteGraph& g,
                            const BasketHypergraph& hg);

}  // namespace basketrec
