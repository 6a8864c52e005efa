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

#include "basketrec/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "basketrec/errors.hpp"

namespace basketrec {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError(fmt::format("invalid value '{}' for '{}'", value, key));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is missing from older libstdc++.
  std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != text.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

struct Field {
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field int_field(T TrainConfig::*member) {
  return {[member](TrainConfig& c, std::string_view v) {
            c.*member = parse_integer<T>("", v);
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(double TrainConfig::*member) {
  return {[member](TrainConfig& c, std::string_view v) {
            c.*member = parse_double("", v);
          },
          [member](const TrainConfig& c) {
            return fmt::format("{}", c.*member);
          }};
}

Field bool_field(bool TrainConfig::*member) {
  return {[member](TrainConfig& c, std::string_view v) {
            c.*member = parse_bool("", v);
          },
          [member](const TrainConfig& c) {
            return std::string(c.*member ? "true" : "false");
          }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> kFields = {
      {"dim", int_field(&TrainConfig::dim)},
      {"layers", int_field(&TrainConfig::layers)},
      {"learning_rate", double_field(&TrainConfig::learning_rate)},
      {"batch_size", int_field(&TrainConfig::batch_size)},
      {"epochs", int_field(&TrainConfig::epochs)},
      {"drop_rate", double_field(&TrainConfig::drop_rate)},
      {"balance", double_field(&TrainConfig::balance)},
      {"temperature", double_field(&TrainConfig::temperature)},
      {"alpha_cross", double_field(&TrainConfig::alpha_cross)},
      {"alpha_within", double_field(&TrainConfig::alpha_within)},
      {"l2", double_field(&TrainConfig::l2)},
      {"seed", int_field(&TrainConfig::seed)},
      {"use_hypergraph", bool_field(&TrainConfig::use_hypergraph)},
      {"use_ca_augmentation", bool_field(&TrainConfig::use_ca_augmentation)},
      {"use_cl_fusion", bool_field(&TrainConfig::use_cl_fusion)},
      {"additive_score", bool_field(&TrainConfig::additive_score)},
      {"exclude_positive_in_denominator",
       bool_field(&TrainConfig::exclude_positive_in_denominator)},
      {"shared_item_base", bool_field(&TrainConfig::shared_item_base)},
      {"optimizer",
       {[](TrainConfig& c, std::string_view v) {
          if (v == "sgd") {
            c.optimizer = OptimizerKind::kSgd;
          } else if (v == "adam") {
            c.optimizer = OptimizerKind::kAdam;
          } else {
            bad_value("optimizer", v);
          }
        },
        [](const TrainConfig& c) {
          return std::string(c.optimizer == OptimizerKind::kAdam ? "adam"
                                                                 : "sgd");
        }}},
      {"adam_beta1", double_field(&TrainConfig::adam_beta1)},
      {"adam_beta2", double_field(&TrainConfig::adam_beta2)},
      {"adam_epsilon", double_field(&TrainConfig::adam_epsilon)},
      {"eval_every", int_field(&TrainConfig::eval_every)},
      {"eval_k", int_field(&TrainConfig::eval_k)},
  };
  return kFields;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](std::string_view what) {
    throw ConfigError(fmt::format("invalid config: {}", what));
  };
  if (dim < 1) fail("dim must be at least 1");
  if (layers < 1) fail("layers must be at least 1");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be non-negative");
  if (!(drop_rate >= 0.0 && drop_rate < 1.0)) fail("drop_rate must be in [0, 1)");
  if (!(balance >= 0.0 && balance <= 1.0)) fail("balance must be in [0, 1]");
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (!(alpha_cross >= 0.0)) fail("alpha_cross must be non-negative");
  if (!(alpha_within >= 0.0)) fail("alpha_within must be non-negative");
  if (!(l2 >= 0.0)) fail("l2 must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam_beta2 must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
  if (eval_every < 0) fail("eval_every must be non-negative");
  if (eval_k < 1) fail("eval_k must be at least 1");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& [name, f] : fields()) keys.push_back(name);
    return keys;
  }();
  return kKeys;
}

void set_config_value(TrainConfig& cfg, std::string_view key,
                      std::string_view value) {
  const Field& f = field(key);
  try {
    f.set(cfg, trim(value));
  } catch (const ConfigError&) {
    bad_value(key, value);
  }
}

std::string get_config_value(const TrainConfig& cfg, std::string_view key) {
  return field(key).get(cfg);
}

void apply_config_text(TrainConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{}
                                        : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(
          fmt::format("line {}: expected 'key = value'", line_no));
    }
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::filesystem::filesystem_error(
        "cannot open config", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [name, f] : fields()) {
    out += fmt::format("{} = {}\n", name, f.get(cfg));
  }
  return out;
}

std::map<std::string, std::string> config_map(const TrainConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [name, f] : fields()) out.emplace(name, f.get(cfg));
  return out;
}

void apply_overrides(TrainConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("override '{}' is not key=value", item));
    }
    set_config_value(cfg, trim(std::string_view(item).substr(0, eq)),
                     std::string_view(item).substr(eq + 1));
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {
      "full",  "lightgcn-only", "hypergraph-only", "no-ca",
      "no-fusion", "random-aug", "additive"};
  return kNames;
}

void apply_preset(TrainConfig& cfg, std::string_view name) {
  if (name == "full") {
    cfg.use_hypergraph = true;
    cfg.use_ca_augmentation = true;
    cfg.use_cl_fusion = true;
    cfg.additive_score = false;
  } else if (name == "lightgcn-only") {
    cfg.use_hypergraph = false;
    cfg.use_cl_fusion = false;
    cfg.alpha_cross = 0.0;
    cfg.alpha_within = 0.0;
    cfg.balance = 0.0;
  } else if (name == "hypergraph-only") {
    cfg.use_hypergraph = true;
    cfg.use_cl_fusion = false;
    cfg.alpha_cross = 0.0;
    cfg.alpha_within = 0.0;
  } else if (name == "no-ca") {
    cfg.alpha_within = 0.0;
    cfg.drop_rate = 0.0;
  } else if (name == "no-fusion") {
    cfg.use_cl_fusion = false;
    cfg.alpha_cross = 0.0;
  } else if (name == "random-aug") {
    cfg.use_ca_augmentation = false;
  } else if (name == "additive") {
    cfg.additive_score = true;
  } else {
    throw ConfigError(fmt::format("unknown preset '{}'", name));
  }
}

void apply_dataset_defaults(TrainConfig& cfg, std::string_view dataset) {
  if (dataset == "instacart") {
    cfg.alpha_cross = 0.1;
    cfg.alpha_within = 0.1;
  } else if (dataset == "tafeng") {
    cfg.alpha_cross = 1e-2;
    cfg.alpha_within = 1e-3;
  } else if (dataset == "valuedshoppers") {
    cfg.alpha_cross = 1e-4;
    cfg.alpha_within = 1e-5;
  } else {
    throw ConfigError(fmt::format("unknown dataset '{}'", dataset));
  }
}

}  // namespace basketrec
