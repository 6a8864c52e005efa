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
#include <string_view>
#include <vector>

#include "basketrec/types.hpp"

namespace basketrec {

struct ContrastiveOptions {
  double temperature = 0.2;
  // Literal reading of the in-batch objective: the denominator sums over
  // negatives only. Off by default (standard InfoNCE).
  bool exclude_positive = false;
};

struct InfoNceResult {
  double loss = 0.0;
  Matrix anchor_grad;
  Matrix positive_grad;
};

// Row a of `anchors` is paired with row a of `positives`; every other row of
// `positives` is an in-batch negative for it. Similarity is cosine. The loss
// is the mean over anchors of
//   -log( exp(cos(a, p_a)/t) / sum_c exp(cos(a, p_c)/t) ).
// Throws DegenerateEmbeddingError naming `what` and the row when a row has
// zero norm.
InfoNceResult info_nce(const Matrix& anchors, const Matrix& positives,
                       const ContrastiveOptions& options,
                       std::string_view what = "row");

// Gathers rows `ids` of `table` into a new matrix.
Matrix gather_rows(const Matrix& table, std::span<const Index> ids);

// Adds `weight * rows.row(k)` to `table.row(ids[k])`.
void scatter_add_rows(Matrix& table, std::span<const Index> ids,
                      const Matrix& rows, double weight);

// Aligns the two views of the same items: anchors are the user-view item
// rows, positives the basket-view rows of the same items. When the gradient
// pointers are set, `weight` times the gradient is accumulated into them.
double cross_behavior_loss(const Matrix& item_user_view,
                           const Matrix& item_basket_view,
                           std::span<const Index> items,
                           const ContrastiveOptions& options, double weight,
                           Matrix* grad_user_view, Matrix* grad_basket_view);

// Original and augmented representations of one entity class, gathered for
// the batch (same row order in both).
struct EntityViews {
  const Matrix* original = nullptr;
  const Matrix* augmented = nullptr;
};

enum WithinTerm { kUserTerm = 0, kItemUserViewTerm, kBasketTerm,
                  kItemBasketViewTerm };

struct WithinBehaviorResult {
  double loss = 0.0;
  std::array<double, 4> terms{};
  std::array<InfoNceResult, 4> parts;
  std::array<bool, 4> active{};
};

// Sum of four InfoNCE terms (users, items on the user graph, baskets, items
// on the basket hypergraph), each contrasting original against augmented
// representations. Entries with no rows are skipped.
WithinBehaviorResult within_behavior_loss(
    const std::array<EntityViews, 4>& views,
    const ContrastiveOptions& options);

// (1 - r) <e_u, e_i> + r <e_b, e_i>, or <e_u, e_i> + <e_b, e_i> when
// `additive` is set.
double score(std::span<const double> user, std::span<const double> basket,
             std::span<const double> item, double balance, bool additive);

// Coefficients on the user and basket vectors used by score().
struct ScoreMix {
  double user = 1.0;
  double basket = 0.0;
};
ScoreMix score_mix(double balance, bool additive);

struct BprTriple {
  Index user = 0;
  Index basket = 0;
  Index positive = 0;
  Index negative = 0;
};

// -log sigmoid(x), evaluated without overflow.
double softplus_neg(double x);
// sigmoid(x), evaluated without overflow.
double sigmoid(double x);

struct BprResult {
  double loss = 0.0;
  Matrix user_grad;    // rows of the user table
  Matrix item_grad;    // rows of the fused item table
  Matrix basket_grad;  // one row per triple
};

// Sum over triples of -log sigmoid(y(u,b,i) - y(u,b,j)), where basket row t
// of `basket_rows` is the embedding of triple t's basket.
BprResult bpr_loss(std::span<const BprTriple> triples, const Matrix& user,
                   const Matrix& fused_item, const Matrix& basket_rows,
                   ScoreMix mix);

// lambda * sum of squared entries over the listed rows; the gradient is
// accumulated into `grad` when set.
double l2_penalty(const Matrix& table, std::span<const Index> rows,
                  double lambda, Matrix* grad);

double total_loss(double main, double cross_behavior, double within_behavior,
                  double alpha_cross, double alpha_within);

}  // namespace basketrec
