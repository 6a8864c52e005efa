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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace oracle {

basketrec::InteractionDataset make_dataset(
    Index num_users, Index num_items, const std::vector<Index>& owner,
    const std::vector<std::vector<Index>>& baskets) {
  basketrec::InteractionDataset ds;
  for (Index u = 0; u < num_users; ++u) ds.user_ids.push_back("u" + std::to_string(u));
  for (Index i = 0; i < num_items; ++i) ds.item_ids.push_back("i" + std::to_string(i));
  ds.user_baskets.resize(num_users);
  for (std::size_t b = 0; b < baskets.size(); ++b) {
    ds.basket_ids.push_back("b" + std::to_string(b));
    ds.basket_owner.push_back(owner[b]);
    ds.basket_items.push_back(baskets[b]);
    ds.user_baskets[owner[b]].push_back(static_cast<Index>(b));
  }
  ds.validate();
  return ds;
}

basketrec::InteractionDataset random_dataset(std::mt19937_64& gen,
                                             Index max_users, Index max_items,
                                             Index max_baskets) {
  auto pick = [&](Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(gen);
  };
  const Index users = pick(1, max_users);
  const Index items = pick(2, max_items);
  const Index nb = pick(1, max_baskets);
  std::vector<Index> owner;
  std::vector<std::vector<Index>> baskets;
  for (Index b = 0; b < nb; ++b) {
    owner.push_back(pick(0, users - 1));
    std::set<Index> members;
    const Index size = pick(1, std::min<Index>(items, 8));
    while (static_cast<Index>(members.size()) < size) members.insert(pick(0, items - 1));
    baskets.emplace_back(members.begin(), members.end());
  }
  return make_dataset(users, items, owner, baskets);
}

namespace {

// users x items 0/1 matrix: user bought the item in any basket.
Matrix purchase_matrix(const basketrec::InteractionDataset& ds) {
  Matrix r = Matrix::Zero(ds.num_users(), ds.num_items());
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    for (Index i : ds.basket_items[b]) r(ds.basket_owner[b], i) = 1.0;
  }
  return r;
}

// items x baskets incidence.
Matrix incidence(const basketrec::InteractionDataset& ds) {
  Matrix h = Matrix::Zero(ds.num_items(), ds.num_baskets());
  for (Index b = 0; b < ds.num_baskets(); ++b) {
    for (Index i : ds.basket_items[b]) h(i, b) = 1.0;
  }
  return h;
}

Eigen::VectorXd inv_sqrt_clamped(const Eigen::VectorXd& deg) {
  Eigen::VectorXd out(deg.size());
  for (Eigen::Index k = 0; k < deg.size(); ++k) {
    out[k] = 1.0 / std::sqrt(std::max(deg[k], 1.0));
  }
  return out;
}

}  // namespace

Matrix dense_bipartite_operator(const basketrec::InteractionDataset& ds) {
  const Matrix r = purchase_matrix(ds);
  const Index n = ds.num_users() + ds.num_items();
  Matrix a = Matrix::Zero(n, n);
  a.topRightCorner(ds.num_users(), ds.num_items()) = r;
  a.bottomLeftCorner(ds.num_items(), ds.num_users()) = r.transpose();
  const Eigen::VectorXd s = inv_sqrt_clamped(a.rowwise().sum());
  return s.asDiagonal() * a * s.asDiagonal();
}

Matrix dense_hypergraph_operator(const basketrec::InteractionDataset& ds) {
  const Matrix h = incidence(ds);
  const Eigen::VectorXd dv = inv_sqrt_clamped(h.rowwise().sum());
  Eigen::VectorXd be = h.colwise().sum().transpose();
  for (Eigen::Index k = 0; k < be.size(); ++k) be[k] = 1.0 / std::max(be[k], 1.0);
  return dv.asDiagonal() * h * be.asDiagonal() * h.transpose() * dv.asDiagonal();
}

Matrix dense_pooled(const Matrix& op, const Matrix& x, int layers) {
  Matrix layer = x;
  Matrix sum = x;
  for (int k = 0; k < layers; ++k) {
    layer = op * layer;
    sum += layer;
  }
  return sum / static_cast<double>(layers + 1);
}

Eigen::VectorXd sqrt_bipartite_degrees(const basketrec::InteractionDataset& ds) {
  const Matrix r = purchase_matrix(ds);
  Eigen::VectorXd out(ds.num_users() + ds.num_items());
  out.head(ds.num_users()) = r.rowwise().sum().cwiseSqrt();
  out.tail(ds.num_items()) = r.colwise().sum().transpose().cwiseSqrt();
  return out;
}

Eigen::VectorXd sqrt_item_hyperdegrees(const basketrec::InteractionDataset& ds) {
  return incidence(ds).rowwise().sum().cwiseSqrt();
}

namespace {

std::vector<Index> top(const std::vector<Index>& ranked, std::size_t k) {
  return {ranked.begin(), ranked.begin() + std::min(k, ranked.size())};
}

std::size_t overlap(const std::vector<Index>& ranked,
                    const std::vector<Index>& truth, std::size_t k) {
  const auto head = top(ranked, k);
  const std::set<Index> a(head.begin(), head.end());
  std::size_t n = 0;
  for (Index t : std::set<Index>(truth.begin(), truth.end())) n += a.count(t);
  return n;
}

}  // namespace

double brute_recall(const std::vector<Index>& ranked,
                    const std::vector<Index>& truth, std::size_t k) {
  return static_cast<double>(overlap(ranked, truth, k)) / truth.size();
}

double brute_precision(const std::vector<Index>& ranked,
                       const std::vector<Index>& truth, std::size_t k) {
  return static_cast<double>(overlap(ranked, truth, k)) / k;
}

double brute_hit(const std::vector<Index>& ranked,
                 const std::vector<Index>& truth, std::size_t k) {
  return overlap(ranked, truth, k) > 0 ? 1.0 : 0.0;
}

double brute_ndcg(const std::vector<Index>& ranked,
                  const std::vector<Index>& truth, std::size_t k) {
  const auto head = top(ranked, k);
  double dcg = 0.0;
  for (std::size_t pos = 1; pos <= head.size(); ++pos) {
    const bool rel =
        std::find(truth.begin(), truth.end(), head[pos - 1]) != truth.end();
    dcg += (std::pow(2.0, rel ? 1.0 : 0.0) - 1.0) / std::log2(pos + 1.0);
  }
  double idcg = 0.0;
  for (std::size_t pos = 1; pos <= std::min(k, truth.size()); ++pos) {
    idcg += 1.0 / std::log2(pos + 1.0);
  }
  return dcg / idcg;
}

Matrix central_difference(Matrix& x, const std::function<double()>& f,
                          double step) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + step;
      const double up = f();
      x(r, c) = saved - step;
      const double down = f();
      x(r, c) = saved;
      g(r, c) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

double max_relative_error(const Matrix& a, const Matrix& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double x = a.data()[k], y = b.data()[k];
    const double scale = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

double brute_info_nce(const Matrix& anchors, const Matrix& positives,
                      double temperature, bool exclude_positive) {
  const auto n = anchors.rows();
  double total = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    auto cosine = [&](Eigen::Index b) {
      return anchors.row(a).dot(positives.row(b)) /
             (anchors.row(a).norm() * positives.row(b).norm());
    };
    double denom = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      if (exclude_positive && b == a) continue;
      denom += std::exp(cosine(b) / temperature);
    }
    total += -std::log(std::exp(cosine(a) / temperature) / denom);
  }
  return total / static_cast<double>(n);
}

}  // namespace oracle
