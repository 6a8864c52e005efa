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

#include "basketrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "basketrec/propagation.hpp"

namespace basketrec {

Parameters init_params(Index num_users, Index num_items,
                       const TrainConfig& cfg, Rng& rng) {
  const double bound = std::sqrt(6.0 / (cfg.dim + cfg.dim));
  auto fill = [&](Index rows) {
    Matrix m(rows, cfg.dim);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = rng.uniform(-bound, bound);
    }
    return m;
  };
  Parameters p;
  p.user = fill(num_users);
  p.item = fill(num_items);
  if (!cfg.shared_item_base) p.item_basket = fill(num_items);
  return p;
}

Representations encode(const GraphViews& graphs, const Parameters& params,
                       int layers, bool use_hypergraph) {
  Representations reps;
  const auto bip =
      propagate_bipartite(*graphs.user_item, params.user, params.item, layers);
  reps.user = pool_layers(bip.user);
  reps.item_user = pool_layers(bip.item);
  if (use_hypergraph) {
    const auto hyper =
        propagate_hypergraph(*graphs.basket, params.hypergraph_input(), layers);
    reps.item_basket = pool_layers(hyper);
    reps.fused = reps.item_user + reps.item_basket;
  } else {
    reps.item_basket = Matrix::Zero(reps.item_user.rows(), reps.item_user.cols());
    reps.fused = reps.item_user;
  }
  return reps;
}

namespace {

std::span<const Index> basket_members(const BasketHypergraph& graph,
                                      const BasketHypergraph& fallback,
                                      Index basket) {
  auto members = graph.members(basket);
  return members.empty() ? fallback.members(basket) : members;
}

// Spreads a basket-embedding gradient evenly over its members.
void distribute_basket_grad(Matrix& item_grad, std::span<const Index> members,
                            const RowVector& grad, double weight) {
  const double share = weight / static_cast<double>(members.size());
  for (Index i : members) item_grad.row(i) += share * grad;
}

void unique_sorted(std::vector<Index>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

struct ViewGradients {
  Matrix user;
  Matrix item_user;
  Matrix item_basket;

  explicit ViewGradients(const Representations& reps)
      : user(Matrix::Zero(reps.user.rows(), reps.user.cols())),
        item_user(Matrix::Zero(reps.item_user.rows(), reps.item_user.cols())),
        item_basket(
            Matrix::Zero(reps.item_basket.rows(), reps.item_basket.cols())) {}
};

// Pulls gradients on pooled representations back to the base tables.
void backpropagate(const GraphViews& graphs, const ViewGradients& vg,
                   const TrainConfig& cfg, Gradients& grads) {
  Matrix user_base, item_base;
  adjoint_bipartite_pooled(*graphs.user_item, vg.user, vg.item_user,
                           cfg.layers, user_base, item_base);
  grads.user += user_base;
  grads.item += item_base;
  if (cfg.use_hypergraph) {
    Matrix hyper_base =
        adjoint_hypergraph_pooled(*graphs.basket, vg.item_basket, cfg.layers);
    if (cfg.shared_item_base) {
      grads.item += hyper_base;
    } else {
      grads.item_basket += hyper_base;
    }
  }
}

}  // namespace

RowVector training_basket_embedding(const Representations& reps,
                                    const BasketHypergraph& graph,
                                    const BasketHypergraph& fallback,
                                    Index basket) {
  return basket_embedding(reps.item_basket,
                          basket_members(graph, fallback, basket));
}

Gradients Gradients::zeros_like(const Parameters& params) {
  Gradients g;
  g.user = Matrix::Zero(params.user.rows(), params.user.cols());
  g.item = Matrix::Zero(params.item.rows(), params.item.cols());
  g.item_basket =
      Matrix::Zero(params.item_basket.rows(), params.item_basket.cols());
  return g;
}

BatchEntities batch_entities(std::span<const BprTriple> triples) {
  BatchEntities e;
  for (const auto& t : triples) {
    e.users.push_back(t.user);
    e.items.push_back(t.positive);
    e.items.push_back(t.negative);
    e.baskets.push_back(t.basket);
  }
  unique_sorted(e.users);
  unique_sorted(e.items);
  unique_sorted(e.baskets);
  return e;
}

BatchLoss batch_objective(const Parameters& params,
                          const GraphViews& original,
                          const GraphViews* augmented,
                          std::span<const BprTriple> triples,
                          const TrainConfig& cfg, Gradients* grads) {
  const bool cross = cfg.cross_behavior_active();
  const bool within = cfg.within_behavior_active();
  if ((cross || within) && augmented == nullptr) {
    throw std::invalid_argument(
        "batch_objective: contrastive terms need augmented graphs");
  }
  const Representations reps =
      encode(original, params, cfg.layers, cfg.use_hypergraph);
  const BasketHypergraph& hyper = *original.basket;

  BatchLoss loss;
  std::optional<ViewGradients> vg;
  if (grads) {
    *grads = Gradients::zeros_like(params);
    vg.emplace(reps);
  }

  // Supervised ranking term.
  Matrix basket_rows(static_cast<Eigen::Index>(triples.size()), cfg.dim);
  for (std::size_t t = 0; t < triples.size(); ++t) {
    basket_rows.row(t) =
        training_basket_embedding(reps, hyper, hyper, triples[t].basket);
  }
  const ScoreMix mix = score_mix(cfg.balance, cfg.additive_score);
  const BprResult bpr =
      bpr_loss(triples, reps.user, reps.fused, basket_rows, mix);
  const BatchEntities entities = batch_entities(triples);
  std::vector<Index> item_rows = entities.items;
  double penalty =
      l2_penalty(params.user, entities.users, cfg.l2, grads ? &grads->user : nullptr);
  penalty += l2_penalty(params.item, item_rows, cfg.l2,
                        grads ? &grads->item : nullptr);
  if (!params.shared_item_base() && cfg.use_hypergraph) {
    penalty += l2_penalty(params.item_basket, item_rows, cfg.l2,
                          grads ? &grads->item_basket : nullptr);
  }
  loss.main = bpr.loss + penalty;
  if (!std::isfinite(loss.main)) {
    // Contrastive terms cannot be normalised from non-finite rows; report
    // the main loss and let the caller decide.
    loss.total = loss.main;
    return loss;
  }
  if (vg) {
    vg->user += bpr.user_grad;
    vg->item_user += bpr.item_grad;
    if (cfg.use_hypergraph) {
      vg->item_basket += bpr.item_grad;
      for (std::size_t t = 0; t < triples.size(); ++t) {
        distribute_basket_grad(vg->item_basket,
                               hyper.members(triples[t].basket),
                               bpr.basket_grad.row(t), 1.0);
      }
    }
  }

  std::optional<Representations> aug_reps;
  std::optional<ViewGradients> aug_vg;
  if (cross || within) {
    aug_reps = encode(*augmented, params, cfg.layers, cfg.use_hypergraph);
    if (grads) aug_vg.emplace(*aug_reps);
  }
  const ContrastiveOptions options{cfg.temperature,
                                   cfg.exclude_positive_in_denominator};

  if (cross) {
    loss.cross = cross_behavior_loss(
        aug_reps->item_user, aug_reps->item_basket, entities.items, options,
        cfg.alpha_cross, aug_vg ? &aug_vg->item_user : nullptr,
        aug_vg ? &aug_vg->item_basket : nullptr);
  }

  if (within) {
    const auto& aug_hyper = *augmented->basket;
    const Matrix user_o = gather_rows(reps.user, entities.users);
    const Matrix user_a = gather_rows(aug_reps->user, entities.users);
    const Matrix item_uo = gather_rows(reps.item_user, entities.items);
    const Matrix item_ua = gather_rows(aug_reps->item_user, entities.items);
    Matrix basket_o, basket_a, item_bo, item_ba;
    std::array<EntityViews, 4> views{};
    views[kUserTerm] = {&user_o, &user_a};
    views[kItemUserViewTerm] = {&item_uo, &item_ua};
    if (cfg.use_hypergraph) {
      const auto nb = static_cast<Eigen::Index>(entities.baskets.size());
      basket_o.resize(nb, cfg.dim);
      basket_a.resize(nb, cfg.dim);
      for (Eigen::Index k = 0; k < nb; ++k) {
        const Index b = entities.baskets[k];
        basket_o.row(k) = training_basket_embedding(reps, hyper, hyper, b);
        basket_a.row(k) =
            training_basket_embedding(*aug_reps, aug_hyper, hyper, b);
      }
      item_bo = gather_rows(reps.item_basket, entities.items);
      item_ba = gather_rows(aug_reps->item_basket, entities.items);
      views[kBasketTerm] = {&basket_o, &basket_a};
      views[kItemBasketViewTerm] = {&item_bo, &item_ba};
    }
    const WithinBehaviorResult wb = within_behavior_loss(views, options);
    loss.within = wb.loss;
    loss.within_terms = wb.terms;
    if (grads) {
      const double w = cfg.alpha_within;
      scatter_add_rows(vg->user, entities.users,
                       wb.parts[kUserTerm].anchor_grad, w);
      scatter_add_rows(aug_vg->user, entities.users,
                       wb.parts[kUserTerm].positive_grad, w);
      scatter_add_rows(vg->item_user, entities.items,
                       wb.parts[kItemUserViewTerm].anchor_grad, w);
      scatter_add_rows(aug_vg->item_user, entities.items,
                       wb.parts[kItemUserViewTerm].positive_grad, w);
      if (cfg.use_hypergraph) {
        for (std::size_t k = 0; k < entities.baskets.size(); ++k) {
          const Index b = entities.baskets[k];
          distribute_basket_grad(vg->item_basket, hyper.members(b),
                                 wb.parts[kBasketTerm].anchor_grad.row(k), w);
          distribute_basket_grad(aug_vg->item_basket,
                                 basket_members(aug_hyper, hyper, b),
                                 wb.parts[kBasketTerm].positive_grad.row(k), w);
        }
        scatter_add_rows(vg->item_basket, entities.items,
                         wb.parts[kItemBasketViewTerm].anchor_grad, w);
        scatter_add_rows(aug_vg->item_basket, entities.items,
                         wb.parts[kItemBasketViewTerm].positive_grad, w);
      }
    }
  }

  loss.total = total_loss(loss.main, loss.cross, loss.within, cfg.alpha_cross,
                          cfg.alpha_within);
  if (grads) {
    backpropagate(original, *vg, cfg, *grads);
    if (aug_vg) backpropagate(*augmented, *aug_vg, cfg, *grads);
  }
  return loss;
}

}  // namespace basketrec
