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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace basketrec {

enum class OptimizerKind { kSgd, kAdam };

// Every scalar that determines a training run.
struct TrainConfig {
  int dim = 64;
  int layers = 2;
  double learning_rate = 5e-4;
  int batch_size = 1024;
  int epochs = 50;
  double drop_rate = 0.3;       // overall edge drop probability p
  double balance = 0.2;         // r: weight of the basket term in the score
  double temperature = 0.2;     // InfoNCE tau
  double alpha_cross = 0.1;     // weight of the cross-behavior loss
  double alpha_within = 0.1;    // weight of the within-behavior loss
  double l2 = 1e-4;             // lambda
  std::uint64_t seed = 42;

  bool use_hypergraph = true;
  bool use_ca_augmentation = true;  // false: uniform random edge dropping
  bool use_cl_fusion = true;
  bool additive_score = false;
  bool exclude_positive_in_denominator = false;
  bool shared_item_base = true;

  OptimizerKind optimizer = OptimizerKind::kSgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Evaluate on the heldout items every this many epochs (0 disables) and
  // keep the best parameters by recall at `eval_k`.
  int eval_every = 0;
  int eval_k = 20;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  // Cross-behavior loss is computed at all.
  bool cross_behavior_active() const {
    return use_hypergraph && use_cl_fusion && alpha_cross > 0.0;
  }
  bool within_behavior_active() const { return alpha_within > 0.0; }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Ordered list of every config key.
const std::vector<std::string>& config_keys();

// Sets one field from its text form; throws ConfigError for unknown keys or
// unparsable values.
void set_config_value(TrainConfig& cfg, std::string_view key,
                      std::string_view value);
std::string get_config_value(const TrainConfig& cfg, std::string_view key);

// Flat "key = value" text; '#' starts a comment. Later lines win.
void apply_config_text(TrainConfig& cfg, std::string_view text);
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);

// Every key, one per line, in config_keys() order.
std::string serialize_config(const TrainConfig& cfg);
std::map<std::string, std::string> config_map(const TrainConfig& cfg);

// Applies "key=value" overrides in order.
void apply_overrides(TrainConfig& cfg, const std::vector<std::string>& sets);

// Named ablation variants:
//   full             every component on
//   lightgcn-only    bipartite graph and BPR only
//   hypergraph-only  both views fused by addition, no contrastive terms
//   no-ca            no within-behavior term, no augmentation
//   no-fusion        no cross-behavior term
//   random-aug       uniform edge dropping instead of importance-based
//   additive         score adds the user and basket terms without r
const std::vector<std::string>& preset_names();
void apply_preset(TrainConfig& cfg, std::string_view name);

// Dataset-specific contrastive weights: instacart, tafeng, valuedshoppers.
void apply_dataset_defaults(TrainConfig& cfg, std::string_view dataset);

}  // namespace basketrec
