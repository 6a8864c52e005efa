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

#include "basketrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "basketrec/errors.hpp"
#include "basketrec/rng.hpp"

namespace basketrec {

Index IdMap::intern(std::string_view raw) {
  auto it = index_.find(std::string(raw));
  if (it != index_.end()) return it->second;
  const Index id = size();
  raw_.emplace_back(raw);
  index_.emplace(raw_.back(), id);
  return id;
}

std::optional<Index> IdMap::find(std::string_view raw) const {
  auto it = index_.find(std::string(raw));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t InteractionDataset::num_pairs() const {
  std::int64_t total = 0;
  for (const auto& items : basket_items) total += std::ssize(items);
  return total;
}

void InteractionDataset::validate() const {
  const auto nb = static_cast<std::size_t>(num_baskets());
  if (basket_owner.size() != nb || basket_items.size() != nb) {
    throw DataError("basket tables disagree in length");
  }
  if (user_baskets.size() != static_cast<std::size_t>(num_users())) {
    throw DataError("user table length does not match user count");
  }
  std::vector<std::size_t> owned(user_baskets.size(), 0);
  for (std::size_t b = 0; b < nb; ++b) {
    const Index owner = basket_owner[b];
    if (owner < 0 || owner >= num_users()) {
      throw DataError(fmt::format("basket {} has invalid owner", b));
    }
    ++owned[owner];
    const auto& items = basket_items[b];
    if (items.empty()) throw DataError(fmt::format("basket {} is empty", b));
    std::vector<Index> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError(fmt::format("basket {} repeats an item", b));
    }
    if (sorted.front() < 0 || sorted.back() >= num_items()) {
      throw DataError(fmt::format("basket {} has an item out of range", b));
    }
  }
  for (std::size_t u = 0; u < user_baskets.size(); ++u) {
    if (user_baskets[u].size() != owned[u]) {
      throw DataError(fmt::format("user {} basket list is inconsistent", u));
    }
    for (Index b : user_baskets[u]) {
      if (b < 0 || b >= num_baskets() || basket_owner[b] != Index(u)) {
        throw DataError(fmt::format("user {} lists a foreign basket", u));
      }
    }
  }
}

namespace {

// Splits one delimited line. Double quotes group fields and "" escapes a
// quote inside a quoted field.
std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

struct Header {
  char delim = ',';
  std::vector<std::string> names;

  std::optional<std::size_t> column(std::string_view name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  }

  std::size_t require(std::string_view name, std::string_view source) const {
    auto col = column(name);
    if (!col) {
      throw SchemaError(
          fmt::format("missing column '{}' in {}", name, source));
    }
    return *col;
  }
};

std::optional<Header> read_header(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    chomp(line);
    if (line.empty()) continue;
    Header header;
    header.delim = line.find('\t') != std::string::npos ? '\t' : ',';
    header.names = split_fields(line, header.delim);
    return header;
  }
  return std::nullopt;
}

class DatasetBuilder {
 public:
  void add(std::string_view user, std::string_view basket,
           std::string_view item) {
    const Index b = baskets_.intern(basket);
    const Index u = users_.intern(user);
    const Index i = items_.intern(item);
    if (b == Index(owner_.size())) {
      owner_.push_back(u);
      items_of_.emplace_back();
    } else if (owner_[b] != u) {
      throw DataError(fmt::format(
          "basket '{}' belongs to both '{}' and '{}'", basket,
          users_.raw(owner_[b]), user));
    }
    const auto key = (static_cast<std::uint64_t>(b) << 32) |
                     static_cast<std::uint32_t>(i);
    if (seen_.insert(key).second) items_of_[b].push_back(i);
  }

  InteractionDataset build() && {
    InteractionDataset ds;
    ds.basket_owner = std::move(owner_);
    ds.basket_items = std::move(items_of_);
    ds.user_ids = users_.raw_ids();
    ds.item_ids = items_.raw_ids();
    ds.basket_ids = baskets_.raw_ids();
    ds.user_baskets.assign(ds.user_ids.size(), {});
    for (Index b = 0; b < ds.num_baskets(); ++b) {
      ds.user_baskets[ds.basket_owner[b]].push_back(b);
    }
    return ds;
  }

 private:
  IdMap users_, items_, baskets_;
  std::vector<Index> owner_;
  std::vector<std::vector<Index>> items_of_;
  std::unordered_set<std::uint64_t> seen_;
};

// Reads rows of one item file into the builder. `owner_of` supplies basket
// owners when the file has no user column.
void read_rows(std::istream& in, const Schema& schema, std::string_view source,
               const std::unordered_map<std::string, std::string>* owner_of,
               DatasetBuilder& builder) {
  auto header = read_header(in);
  if (!header) throw EmptyDatasetError(fmt::format("{} is empty", source));
  const std::size_t basket_col = header->require(schema.basket_col, source);
  const std::size_t item_col = header->require(schema.item_col, source);
  std::optional<std::size_t> user_col;
  if (owner_of == nullptr) {
    user_col = header->require(schema.user_col, source);
  }
  const std::size_t width = header->names.size();

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (line.empty()) continue;
    auto fields = split_fields(line, header->delim);
    if (fields.size() < width) {
      throw SchemaError(fmt::format("{}:{}: expected {} fields, found {}",
                                    source, line_no, width, fields.size()));
    }
    const std::string& basket = fields[basket_col];
    if (user_col) {
      builder.add(fields[*user_col], basket, fields[item_col]);
    } else {
      auto it = owner_of->find(basket);
      if (it == owner_of->end()) {
        throw DataError(fmt::format("{}:{}: basket '{}' has no owner", source,
                                    line_no, basket));
      }
      builder.add(it->second, basket, fields[item_col]);
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::filesystem::filesystem_error(
        "cannot open input", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  }
  return in;
}

}  // namespace

InteractionDataset parse_transactions(std::istream& in,
                                      const Schema& schema) {
  DatasetBuilder builder;
  read_rows(in, schema, "<stream>", nullptr, builder);
  auto ds = std::move(builder).build();
  if (ds.num_baskets() == 0) throw EmptyDatasetError("no transactions");
  return ds;
}

InteractionDataset load_transactions(
    const std::vector<std::filesystem::path>& paths, const Schema& schema,
    const std::optional<std::filesystem::path>& orders_path) {
  std::unordered_map<std::string, std::string> owner_of;
  if (orders_path) {
    auto in = open_input(*orders_path);
    const std::string source = orders_path->string();
    auto header = read_header(in);
    if (!header) throw EmptyDatasetError(fmt::format("{} is empty", source));
    const std::size_t basket_col = header->require(schema.basket_col, source);
    const std::size_t user_col = header->require(schema.user_col, source);
    std::string line;
    while (std::getline(in, line)) {
      chomp(line);
      if (line.empty()) continue;
      auto fields = split_fields(line, header->delim);
      if (fields.size() <= std::max(basket_col, user_col)) {
        throw SchemaError(fmt::format("{}: short row '{}'", source, line));
      }
      owner_of.emplace(std::move(fields[basket_col]),
                       std::move(fields[user_col]));
    }
  }

  DatasetBuilder builder;
  for (const auto& path : paths) {
    auto in = open_input(path);
    read_rows(in, schema, path.string(), orders_path ? &owner_of : nullptr,
              builder);
  }
  auto ds = std::move(builder).build();
  if (ds.num_baskets() == 0) throw EmptyDatasetError("no transactions");
  return ds;
}

InteractionDataset filter_baskets(const InteractionDataset& ds,
                                  std::size_t min_size) {
  if (min_size < 1) throw DataError("min_size must be at least 1");

  std::vector<Index> user_map(ds.num_users(), -1);
  std::vector<Index> item_map(ds.num_items(), -1);
  std::vector<char> keep(ds.num_baskets(), 0);
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    if (ds.basket_items[b].size() < min_size) continue;
    keep[b] = 1;
    user_map[ds.basket_owner[b]] = 0;
    for (Index i : ds.basket_items[b]) item_map[i] = 0;
  }

  InteractionDataset out;
  // Ascending old ids keep first-appearance order.
  for (Index u = 0; u < ds.num_users(); ++u) {
    if (user_map[u] < 0) continue;
    user_map[u] = out.num_users();
    out.user_ids.push_back(ds.user_ids[u]);
  }
  for (Index i = 0; i < ds.num_items(); ++i) {
    if (item_map[i] < 0) continue;
    item_map[i] = out.num_items();
    out.item_ids.push_back(ds.item_ids[i]);
  }
  out.user_baskets.assign(out.user_ids.size(), {});
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    if (!keep[b]) continue;
    const Index nb = out.num_baskets();
    const Index owner = user_map[ds.basket_owner[b]];
    out.basket_ids.push_back(ds.basket_ids[b]);
    out.basket_owner.push_back(owner);
    auto& items = out.basket_items.emplace_back();
    items.reserve(ds.basket_items[b].size());
    for (Index i : ds.basket_items[b]) items.push_back(item_map[i]);
    out.user_baskets[owner].push_back(nb);
  }
  if (out.num_baskets() == 0) {
    throw EmptyDatasetError(
        fmt::format("no basket has at least {} items", min_size));
  }
  return out;
}

std::vector<Index> SplitDataset::evaluable_baskets() const {
  std::vector<Index> out;
  for (Index b = 0; b < Index(heldout.size()); ++b) {
    if (!heldout[b].empty()) out.push_back(b);
  }
  return out;
}

void SplitDataset::validate() const {
  train.validate();
  if (heldout.size() != static_cast<std::size_t>(train.num_baskets())) {
    throw DataError("heldout table does not cover every basket");
  }
  for (Index b = 0; b < train.num_baskets(); ++b) {
    std::vector<Index> a = train.basket_items[b];
    std::vector<Index> h = heldout[b];
    std::sort(a.begin(), a.end());
    std::sort(h.begin(), h.end());
    std::vector<Index> common;
    std::set_intersection(a.begin(), a.end(), h.begin(), h.end(),
                          std::back_inserter(common));
    if (!common.empty()) {
      throw DataError(fmt::format("basket {} overlaps its heldout items", b));
    }
    if (std::adjacent_find(h.begin(), h.end()) != h.end()) {
      throw DataError(fmt::format("basket {} repeats a heldout item", b));
    }
    for (Index i : h) {
      if (i < 0 || i >= train.num_items()) {
        throw DataError(fmt::format("basket {} heldout item out of range", b));
      }
    }
  }
}

std::size_t train_count(std::size_t size, double train_ratio) {
  // The epsilon absorbs products such as 0.7 * 10 = 7.000000000000001.
  const double raw = std::ceil(train_ratio * static_cast<double>(size) - 1e-9);
  const auto count = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(count, size);
}

SplitDataset split_within_basket(const InteractionDataset& ds,
                                 double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw DataError("train_ratio must lie strictly between 0 and 1");
  }
  Rng rng = Rng::stream(seed, "split");
  SplitDataset split;
  split.train = ds;
  split.heldout.assign(ds.num_baskets(), {});
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    const auto& items = ds.basket_items[b];
    const std::size_t n = items.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t k = train_count(n, train_ratio);
    std::vector<char> to_train(n, 0);
    for (std::size_t j = 0; j < k; ++j) to_train[order[j]] = 1;

    auto& train_items = split.train.basket_items[b];
    train_items.clear();
    for (std::size_t j = 0; j < n; ++j) {
      (to_train[j] ? train_items : split.heldout[b]).push_back(items[j]);
    }
  }
  return split;
}

DatasetStats compute_stats(const InteractionDataset& ds) {
  DatasetStats s;
  s.num_users = ds.num_users();
  s.num_items = ds.num_items();
  s.num_baskets = ds.num_baskets();
  s.num_pairs = ds.num_pairs();
  if (s.num_baskets > 0) {
    s.mean_basket_size = double(s.num_pairs) / double(s.num_baskets);
  }
  if (s.num_users > 0) {
    s.mean_baskets_per_user = double(s.num_baskets) / double(s.num_users);
  }
  return s;
}

std::string format_stats(const DatasetStats& s, std::string_view title) {
  return fmt::format(
      "dataset\t{}\nusers\t{}\nitems\t{}\nbaskets\t{}\ninteractions\t{}\n"
      "average_basket_size\t{:.2f}\naverage_baskets_per_user\t{:.2f}\n",
      title, s.num_users, s.num_items, s.num_baskets, s.num_pairs,
      s.mean_basket_size, s.mean_baskets_per_user);
}

namespace {

constexpr std::string_view kSplitMagic = "basketrec-split";
constexpr int kSplitVersion = 1;

void check_token(const std::string& raw) {
  if (raw.find_first_of("\t\n\r") != std::string::npos) {
    throw DataError(fmt::format("identifier '{}' contains a tab or newline",
                                raw));
  }
}

std::string join_ids(const std::vector<Index>& ids) {
  std::string out;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (j) out.push_back(' ');
    out += std::to_string(ids[j]);
  }
  return out;
}

std::vector<Index> parse_ids(const std::string& text) {
  std::vector<Index> ids;
  std::istringstream in(text);
  long long v;
  while (in >> v) ids.push_back(static_cast<Index>(v));
  if (!in.eof()) throw DataError(fmt::format("bad id list '{}'", text));
  return ids;
}

}  // namespace

void write_split(std::ostream& out, const SplitDataset& split) {
  const auto& ds = split.train;
  out << kSplitMagic << '\t' << kSplitVersion << '\n';
  out << "counts\t" << ds.num_users() << '\t' << ds.num_items() << '\t'
      << ds.num_baskets() << '\n';
  for (const auto& raw : ds.user_ids) {
    check_token(raw);
    out << "user\t" << raw << '\n';
  }
  for (const auto& raw : ds.item_ids) {
    check_token(raw);
    out << "item\t" << raw << '\n';
  }
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    check_token(ds.basket_ids[b]);
    out << "basket\t" << ds.basket_ids[b] << '\t' << ds.basket_owner[b]
        << '\t' << join_ids(ds.basket_items[b]) << '\t'
        << join_ids(split.heldout[b]) << '\n';
  }
  out << "end\n";
}

SplitDataset read_split(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("split file is empty");
  {
    auto fields = split_fields(line, '\t');
    if (fields.size() != 2 || fields[0] != kSplitMagic) {
      throw DataError("not a split file");
    }
    if (fields[1] != std::to_string(kSplitVersion)) {
      throw DataError(fmt::format("unsupported split version {}", fields[1]));
    }
  }
  SplitDataset split;
  auto& ds = split.train;
  long long nu = -1, ni = -1, nb = -1;
  bool ended = false;
  while (std::getline(in, line)) {
    auto fields = split_fields(line, '\t');
    const std::string& tag = fields[0];
    if (tag == "counts" && fields.size() == 4) {
      nu = std::stoll(fields[1]);
      ni = std::stoll(fields[2]);
      nb = std::stoll(fields[3]);
    } else if (tag == "user" && fields.size() == 2) {
      ds.user_ids.push_back(fields[1]);
    } else if (tag == "item" && fields.size() == 2) {
      ds.item_ids.push_back(fields[1]);
    } else if (tag == "basket" && fields.size() == 5) {
      ds.basket_ids.push_back(fields[1]);
      ds.basket_owner.push_back(static_cast<Index>(std::stoll(fields[2])));
      ds.basket_items.push_back(parse_ids(fields[3]));
      split.heldout.push_back(parse_ids(fields[4]));
    } else if (tag == "end") {
      ended = true;
      break;
    } else {
      throw DataError(fmt::format("malformed split line '{}'", line));
    }
  }
  if (!ended) throw DataError("split file is truncated");
  if (nu != ds.num_users() || ni != ds.num_items() || nb != ds.num_baskets()) {
    throw DataError("split file counts do not match its contents");
  }
  ds.user_baskets.assign(ds.user_ids.size(), {});
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    const Index owner = ds.basket_owner[b];
    if (owner < 0 || owner >= ds.num_users()) {
      throw DataError(fmt::format("basket {} has invalid owner", b));
    }
    ds.user_baskets[owner].push_back(b);
  }
  split.validate();
  return split;
}

void save_split(const std::filesystem::path& path, const SplitDataset& split) {
  std::ofstream out(path, std::ios::binary);
  write_split(out, split);
  if (!out) {
    throw std::filesystem::filesystem_error(
        "cannot write split", path, std::make_error_code(std::errc::io_error));
  }
}

SplitDataset load_split(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_split(in);
}

}  // namespace basketrec
