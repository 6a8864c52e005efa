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

#include "basketrec/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "basketrec/errors.hpp"

namespace basketrec {

namespace {

// Normalizes every row; throws on zero rows.
Matrix unit_rows(const Matrix& m, std::vector<double>& norms,
                 std::string_view what, std::string_view side) {
  Matrix out(m.rows(), m.cols());
  norms.resize(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double n = m.row(r).norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DegenerateEmbeddingError(
          fmt::format("{} {} ({}) has zero or non-finite norm", what, r, side));
    }
    norms[r] = n;
    out.row(r) = m.row(r) / n;
  }
  return out;
}

// Pulls a gradient on normalized rows back to the raw rows.
Matrix unnormalize_grad(const Matrix& unit, const std::vector<double>& norms,
                        const Matrix& unit_grad) {
  Matrix out(unit.rows(), unit.cols());
  for (Eigen::Index r = 0; r < unit.rows(); ++r) {
    const double radial = unit.row(r).dot(unit_grad.row(r));
    out.row(r) = (unit_grad.row(r) - radial * unit.row(r)) / norms[r];
  }
  return out;
}

}  // namespace

InfoNceResult info_nce(const Matrix& anchors, const Matrix& positives,
                       const ContrastiveOptions& options,
                       std::string_view what) {
  if (anchors.rows() != positives.rows() || anchors.cols() != positives.cols()) {
    throw std::invalid_argument("info_nce: anchors and positives differ in shape");
  }
  if (!(options.temperature > 0.0)) {
    throw std::invalid_argument("info_nce: temperature must be positive");
  }
  InfoNceResult result;
  const Eigen::Index n = anchors.rows();
  result.anchor_grad = Matrix::Zero(n, anchors.cols());
  result.positive_grad = Matrix::Zero(n, anchors.cols());
  if (n == 0) return result;

  std::vector<double> anchor_norm, positive_norm;
  const Matrix a = unit_rows(anchors, anchor_norm, what, "anchor");
  const Matrix p = unit_rows(positives, positive_norm, what, "positive");
  const double inv_t = 1.0 / options.temperature;
  const Matrix logits = (a * p.transpose()) * inv_t;

  Matrix dlogits = Matrix::Zero(n, n);
  Eigen::Index counted = 0;
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < n; ++c) {
      if (options.exclude_positive && c == r) continue;
      top = std::max(top, logits(r, c));
    }
    // Only possible with exclude_positive and a single row: no candidates.
    if (!std::isfinite(top)) continue;
    double denom = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (options.exclude_positive && c == r) continue;
      denom += std::exp(logits(r, c) - top);
    }
    const double log_denom = top + std::log(denom);
    total += log_denom - logits(r, r);
    ++counted;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (options.exclude_positive && c == r) continue;
      dlogits(r, c) = std::exp(logits(r, c) - log_denom);
    }
    dlogits(r, r) -= 1.0;
  }
  if (counted == 0) return result;
  result.loss = total / static_cast<double>(counted);

  const Matrix dsim = dlogits * (inv_t / static_cast<double>(counted));
  const Matrix da = dsim * p;
  const Matrix dp = dsim.transpose() * a;
  result.anchor_grad = unnormalize_grad(a, anchor_norm, da);
  result.positive_grad = unnormalize_grad(p, positive_norm, dp);
  return result;
}

Matrix gather_rows(const Matrix& table, std::span<const Index> ids) {
  Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t k = 0; k < ids.size(); ++k) out.row(k) = table.row(ids[k]);
  return out;
}

void scatter_add_rows(Matrix& table, std::span<const Index> ids,
                      const Matrix& rows, double weight) {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    table.row(ids[k]) += weight * rows.row(k);
  }
}

double cross_behavior_loss(const Matrix& item_user_view,
                           const Matrix& item_basket_view,
                           std::span<const Index> items,
                           const ContrastiveOptions& options, double weight,
                           Matrix* grad_user_view, Matrix* grad_basket_view) {
  const auto result =
      info_nce(gather_rows(item_user_view, items),
               gather_rows(item_basket_view, items), options, "item");
  if (grad_user_view) {
    scatter_add_rows(*grad_user_view, items, result.anchor_grad, weight);
  }
  if (grad_basket_view) {
    scatter_add_rows(*grad_basket_view, items, result.positive_grad, weight);
  }
  return result.loss;
}

WithinBehaviorResult within_behavior_loss(
    const std::array<EntityViews, 4>& views,
    const ContrastiveOptions& options) {
  static constexpr std::array<std::string_view, 4> kNames = {
      "user", "item (user graph)", "basket", "item (basket graph)"};
  WithinBehaviorResult out;
  for (std::size_t t = 0; t < views.size(); ++t) {
    const auto& v = views[t];
    if (v.original == nullptr || v.augmented == nullptr ||
        v.original->rows() == 0) {
      continue;
    }
    out.parts[t] = info_nce(*v.original, *v.augmented, options, kNames[t]);
    out.terms[t] = out.parts[t].loss;
    out.active[t] = true;
    out.loss += out.terms[t];
  }
  return out;
}

ScoreMix score_mix(double balance, bool additive) {
  if (additive) return {1.0, 1.0};
  return {1.0 - balance, balance};
}

double score(std::span<const double> user, std::span<const double> basket,
             std::span<const double> item, double balance, bool additive) {
  if (user.size() != item.size() || basket.size() != item.size()) {
    throw std::invalid_argument("score: vector widths differ");
  }
  const ScoreMix mix = score_mix(balance, additive);
  double ui = 0.0, bi = 0.0;
  for (std::size_t k = 0; k < item.size(); ++k) {
    ui += user[k] * item[k];
    bi += basket[k] * item[k];
  }
  return mix.user * ui + mix.basket * bi;
}

double softplus_neg(double x) {
  // -log sigmoid(x) = log(1 + exp(-x))
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

BprResult bpr_loss(std::span<const BprTriple> triples, const Matrix& user,
                   const Matrix& fused_item, const Matrix& basket_rows,
                   ScoreMix mix) {
  if (basket_rows.rows() != static_cast<Eigen::Index>(triples.size())) {
    throw std::invalid_argument("bpr_loss: one basket row per triple");
  }
  BprResult out;
  out.user_grad = Matrix::Zero(user.rows(), user.cols());
  out.item_grad = Matrix::Zero(fused_item.rows(), fused_item.cols());
  out.basket_grad = Matrix::Zero(basket_rows.rows(), basket_rows.cols());
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const auto& tr = triples[t];
    const RowVector query =
        mix.user * user.row(tr.user) + mix.basket * basket_rows.row(t);
    const RowVector diff =
        fused_item.row(tr.positive) - fused_item.row(tr.negative);
    const double margin = query.dot(diff);
    out.loss += softplus_neg(margin);
    // d/dmargin of -log sigmoid(margin)
    const double g = -sigmoid(-margin);
    out.item_grad.row(tr.positive) += g * query;
    out.item_grad.row(tr.negative) -= g * query;
    out.user_grad.row(tr.user) += (g * mix.user) * diff;
    out.basket_grad.row(t) += (g * mix.basket) * diff;
  }
  return out;
}

double l2_penalty(const Matrix& table, std::span<const Index> rows,
                  double lambda, Matrix* grad) {
  double sum = 0.0;
  for (Index r : rows) {
    sum += table.row(r).squaredNorm();
    if (grad) grad->row(r) += (2.0 * lambda) * table.row(r);
  }
  return lambda * sum;
}

double total_loss(double main, double cross_behavior, double within_behavior,
                  double alpha_cross, double alpha_within) {
  return main + alpha_cross * cross_behavior + alpha_within * within_behavior;
}

}  // namespace basketrec
