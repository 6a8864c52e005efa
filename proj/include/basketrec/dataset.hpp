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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "basketrec/types.hpp"

namespace basketrec {

// Bidirectional mapping between raw string identifiers and dense ids,
// in order of first appearance.
class IdMap {
 public:
  Index intern(std::string_view raw);
  std::optional<Index> find(std::string_view raw) const;
  const std::string& raw(Index id) const { return raw_[id]; }
  Index size() const { return static_cast<Index>(raw_.size()); }
  const std::vector<std::string>& raw_ids() const { return raw_; }

 private:
  std::vector<std::string> raw_;
  std::unordered_map<std::string, Index> index_;
};

// Users, items and baskets after id remapping. Every basket has exactly one
// owner and a nonempty, duplicate-free item list.
struct InteractionDataset {
  std::vector<Index> basket_owner;
  std::vector<std::vector<Index>> basket_items;
  std::vector<std::vector<Index>> user_baskets;

  // raw identifiers indexed by dense id
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::vector<std::string> basket_ids;

  Index num_users() const { return static_cast<Index>(user_ids.size()); }
  Index num_items() const { return static_cast<Index>(item_ids.size()); }
  Index num_baskets() const { return static_cast<Index>(basket_ids.size()); }

  // Number of (basket, item) pairs.
  std::int64_t num_pairs() const;

  // Throws DataError when an invariant is violated.
  void validate() const;
};

// Column names of a transaction file. When `user_col` is absent from the
// item file, the owner of each basket is read from a separate orders file.
struct Schema {
  std::string user_col = "user_id";
  std::string basket_col = "order_id";
  std::string item_col = "product_id";
};

// Parses delimited text (comma or tab, detected from the header) with a
// header row. Duplicate (basket, item) rows are collapsed.
InteractionDataset parse_transactions(std::istream& in,
                                      const Schema& schema);

// Reads one or more transaction files. If `orders_path` is given, basket
// owners come from that file (columns basket_col and user_col) and the item
// files need only basket_col and item_col.
InteractionDataset load_transactions(
    const std::vector<std::filesystem::path>& paths, const Schema& schema,
    const std::optional<std::filesystem::path>& orders_path = std::nullopt);

// Keeps baskets with at least `min_size` items, drops orphaned users and
// items, and re-densifies ids preserving first-appearance order.
InteractionDataset filter_baskets(const InteractionDataset& ds,
                                  std::size_t min_size);

// Train items per basket plus the held-out remainder. An empty heldout list
// marks a basket that is trained on but never evaluated.
struct SplitDataset {
  InteractionDataset train;
  std::vector<std::vector<Index>> heldout;

  std::vector<Index> evaluable_baskets() const;
  void validate() const;
};

// Number of items of a basket of `size` that go to training.
std::size_t train_count(std::size_t size, double train_ratio);

SplitDataset split_within_basket(const InteractionDataset& ds,
                                 double train_ratio, std::uint64_t seed);

struct DatasetStats {
  Index num_users = 0;
  Index num_items = 0;
  Index num_baskets = 0;
  std::int64_t num_pairs = 0;
  double mean_basket_size = 0.0;
  double mean_baskets_per_user = 0.0;
};

DatasetStats compute_stats(const InteractionDataset& ds);

// Human-readable two-decimal report.
std::string format_stats(const DatasetStats& stats, std::string_view title);

// Versioned text serialization of a split.
void write_split(std::ostream& out, const SplitDataset& split);
SplitDataset read_split(std::istream& in);
void save_split(const std::filesystem::path& path, const SplitDataset& split);
SplitDataset load_split(const std::filesystem::path& path);

}  // namespace basketrec
