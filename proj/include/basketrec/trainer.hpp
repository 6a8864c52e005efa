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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "basketrec/augmentation.hpp"
#include "basketrec/config.hpp"
#include "basketrec/dataset.hpp"
#include "basketrec/graphs.hpp"
#include "basketrec/model.hpp"
#include "basketrec/rng.hpp"

namespace basketrec {

// Draws (user, basket, positive, negative) training triples from the train
// side of a split.
class TripleSampler {
 public:
  explicit TripleSampler(const InteractionDataset& train);

  BprTriple sample(Rng& rng) const;
  std::vector<BprTriple> sample(std::size_t count, Rng& rng) const;

  // Rejection draws before falling back to enumerating the complement.
  static constexpr int kMaxRejections = 64;

 private:
  Index num_items_ = 0;
  std::vector<Index> baskets_;  // train baskets with at least one item
  std::vector<Index> owner_;
  std::vector<std::vector<Index>> basket_items_;
  std::vector<std::vector<Index>> user_items_;  // sorted
};

// First and second moment tables for the adaptive optimizer.
struct AdamState {
  std::int64_t step = 0;
  std::array<Matrix, 3> first;   // user, item, item_basket
  std::array<Matrix, 3> second;
};

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const TrainConfig& cfg, const Parameters& params);

  // Rows whose gradient is exactly zero are left untouched, so parameters
  // a batch never reaches keep their values (and moment estimates).
  void step(Parameters& params, const Gradients& grads);

  const AdamState& adam() const { return adam_; }
  void set_adam(AdamState state) { adam_ = std::move(state); }

 private:
  OptimizerKind kind_ = OptimizerKind::kSgd;
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double epsilon_ = 1e-8;
  AdamState adam_;
};

struct Checkpoint {
  TrainConfig config;
  int epoch = 0;
  Parameters params;
  AdamState adam;
  std::string sample_rng;
  std::string augment_rng;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct EpochStats {
  int epoch = 0;
  std::size_t batches = 0;
  double main = 0.0;  // mean over batches
  double cross = 0.0;
  double within = 0.0;
  double total = 0.0;
  double seconds = 0.0;
};

// Number of triples in each mini-batch of an epoch: the epoch covers as
// many triples as there are train pairs.
std::vector<std::size_t> batch_sizes(std::int64_t num_pairs, int batch_size);

class Trainer {
 public:
  Trainer(const InteractionDataset& train, const TrainConfig& cfg);
  // Continues from a checkpoint taken on the same training data.
  Trainer(const InteractionDataset& train, const Checkpoint& ckpt);

  EpochStats train_epoch();

  Checkpoint checkpoint() const;
  const TrainConfig& config() const { return cfg_; }
  const Parameters& params() const { return params_; }
  Parameters& mutable_params() { return params_; }
  int epoch() const { return epoch_; }
  GraphViews graphs() const { return {&user_item_, &basket_}; }
  const BipartiteGraph& user_item_graph() const { return user_item_; }
  const BasketHypergraph& basket_graph() const { return basket_; }

 private:
  TrainConfig cfg_;
  BipartiteGraph user_item_;
  BasketHypergraph basket_;
  DropPlan plan_;
  TripleSampler sampler_;
  Parameters params_;
  Optimizer optimizer_;
  Rng sample_rng_;
  Rng augment_rng_;
  int epoch_ = 0;
};

// Representations used for scoring: always the unaugmented graphs.
Representations inference_representations(const Trainer& trainer);

struct FitOptions {
  // Called every `eval_every` epochs; higher is better.
  std::function<double(const Trainer&)> validate;
  // Receives one JSON record per epoch.
  std::ostream* log = nullptr;
};

struct FitResult {
  Checkpoint last;
  std::optional<Checkpoint> best;
  double best_score = 0.0;
  std::vector<EpochStats> history;
};

// Runs the remaining epochs of `trainer` up to its configured budget.
FitResult fit(Trainer& trainer, const FitOptions& options = {});
FitResult fit(const InteractionDataset& train, const TrainConfig& cfg,
              const FitOptions& options = {});

std::string epoch_record(const EpochStats& stats);

}  // namespace basketrec
