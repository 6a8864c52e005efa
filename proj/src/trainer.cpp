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

#include "basketrec/trainer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "basketrec/errors.hpp"

namespace basketrec {

TripleSampler::TripleSampler(const InteractionDataset& train)
    : num_items_(train.num_items()),
      owner_(train.basket_owner),
      basket_items_(train.basket_items),
      user_items_(train.num_users()) {
  for (Index b = 0; b < train.num_baskets(); ++b) {
    if (train.basket_items[b].empty()) continue;
    baskets_.push_back(b);
    auto& items = user_items_[train.basket_owner[b]];
    items.insert(items.end(), train.basket_items[b].begin(),
                 train.basket_items[b].end());
  }
  for (auto& items : user_items_) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  if (baskets_.empty()) {
    throw EmptyDatasetError("no train basket has any item to sample");
  }
}

BprTriple TripleSampler::sample(Rng& rng) const {
  BprTriple t;
  t.basket = baskets_[rng.uniform_index(baskets_.size())];
  t.user = owner_[t.basket];
  const auto& items = basket_items_[t.basket];
  t.positive = items[rng.uniform_index(items.size())];
  const auto& bought = user_items_[t.user];
  auto owned = [&](Index j) {
    return std::binary_search(bought.begin(), bought.end(), j);
  };
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const auto j = static_cast<Index>(rng.uniform_index(num_items_));
    if (!owned(j)) {
      t.negative = j;
      return t;
    }
  }
  std::vector<Index> complement;
  for (Index j = 0; j < num_items_; ++j) {
    if (!owned(j)) complement.push_back(j);
  }
  if (complement.empty()) {
    throw SamplingError(fmt::format(
        "user {} purchased every item; no negative can be drawn", t.user));
  }
  t.negative = complement[rng.uniform_index(complement.size())];
  return t;
}

std::vector<BprTriple> TripleSampler::sample(std::size_t count,
                                             Rng& rng) const {
  std::vector<BprTriple> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample(rng));
  return out;
}

Optimizer::Optimizer(const TrainConfig& cfg, const Parameters& params)
    : kind_(cfg.optimizer),
      lr_(cfg.learning_rate),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      epsilon_(cfg.adam_epsilon) {
  if (kind_ == OptimizerKind::kAdam) {
    const std::array<const Matrix*, 3> tables = {&params.user, &params.item,
                                                 &params.item_basket};
    for (std::size_t t = 0; t < tables.size(); ++t) {
      adam_.first[t] = Matrix::Zero(tables[t]->rows(), tables[t]->cols());
      adam_.second[t] = Matrix::Zero(tables[t]->rows(), tables[t]->cols());
    }
  }
}

void Optimizer::step(Parameters& params, const Gradients& grads) {
  const std::array<Matrix*, 3> tables = {&params.user, &params.item,
                                         &params.item_basket};
  const std::array<const Matrix*, 3> g = {&grads.user, &grads.item,
                                          &grads.item_basket};
  if (kind_ == OptimizerKind::kSgd) {
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (tables[t]->size() == 0) continue;
      *tables[t] -= lr_ * *g[t];
    }
    return;
  }
  ++adam_.step;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(adam_.step));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(adam_.step));
  for (std::size_t t = 0; t < tables.size(); ++t) {
    Matrix& p = *tables[t];
    Matrix& m = adam_.first[t];
    Matrix& v = adam_.second[t];
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      if (g[t]->row(r).isZero(0.0)) continue;
      m.row(r) = beta1_ * m.row(r) + (1.0 - beta1_) * g[t]->row(r);
      v.row(r) = beta2_ * v.row(r) +
                 (1.0 - beta2_) * g[t]->row(r).cwiseProduct(g[t]->row(r));
      p.row(r).array() -= lr_ * (m.row(r).array() / c1) /
                          ((v.row(r).array() / c2).sqrt() + epsilon_);
    }
  }
}

namespace {

constexpr std::string_view kCheckpointMagic = "basketrec-checkpoint";
constexpr int kCheckpointVersion = 1;

void write_table(std::ostream& out, std::string_view name, const Matrix& m) {
  out << "table " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  std::string bytes(static_cast<std::size_t>(m.size()) * 8, '\0');
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const auto bits = std::bit_cast<std::uint64_t>(m.data()[k]);
    for (int b = 0; b < 8; ++b) {
      bytes[static_cast<std::size_t>(k) * 8 + b] =
          static_cast<char>((bits >> (8 * b)) & 0xff);
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out << '\n';
}

std::string expect_line(std::istream& in, std::string_view what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(fmt::format("checkpoint truncated before {}", what));
  }
  return line;
}

Matrix read_table(std::istream& in, std::string_view name) {
  std::istringstream header(expect_line(in, name));
  std::string tag, found;
  Eigen::Index rows = -1, cols = -1;
  header >> tag >> found >> rows >> cols;
  if (tag != "table" || found != name || rows < 0 || cols < 0) {
    throw DataError(fmt::format("checkpoint: expected table '{}'", name));
  }
  Matrix m(rows, cols);
  std::string bytes(static_cast<std::size_t>(m.size()) * 8, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw DataError(fmt::format("checkpoint: table '{}' truncated", name));
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(
                  bytes[static_cast<std::size_t>(k) * 8 + b]))
              << (8 * b);
    }
    m.data()[k] = std::bit_cast<double>(bits);
  }
  expect_line(in, name);  // newline after the payload
  return m;
}

constexpr std::array<std::string_view, 3> kTableNames = {"user", "item",
                                                         "item_basket"};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const std::string config = serialize_config(ckpt.config);
  const auto config_lines = std::count(config.begin(), config.end(), '\n');
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "epoch " << ckpt.epoch << '\n';
  out << "config " << config_lines << '\n' << config;
  out << "rng sample\n" << ckpt.sample_rng << '\n';
  out << "rng augment\n" << ckpt.augment_rng << '\n';
  out << "adam_step " << ckpt.adam.step << '\n';
  write_table(out, "user", ckpt.params.user);
  write_table(out, "item", ckpt.params.item);
  write_table(out, "item_basket", ckpt.params.item_basket);
  for (std::size_t t = 0; t < kTableNames.size(); ++t) {
    write_table(out, fmt::format("adam_first_{}", kTableNames[t]),
                ckpt.adam.first[t]);
    write_table(out, fmt::format("adam_second_{}", kTableNames[t]),
                ckpt.adam.second[t]);
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  {
    std::istringstream header(expect_line(in, "header"));
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kCheckpointMagic) throw DataError("not a basketrec checkpoint");
    if (version != kCheckpointVersion) {
      throw DataError(
          fmt::format("unsupported checkpoint version {}", version));
    }
  }
  auto keyed = [&](std::string_view key) {
    std::istringstream line(expect_line(in, key));
    std::string found;
    std::int64_t value = 0;
    line >> found >> value;
    if (found != key || !line) {
      throw DataError(fmt::format("checkpoint: expected '{}'", key));
    }
    return value;
  };
  ckpt.epoch = static_cast<int>(keyed("epoch"));
  const auto config_lines = keyed("config");
  std::string config;
  for (std::int64_t k = 0; k < config_lines; ++k) {
    config += expect_line(in, "config") + '\n';
  }
  try {
    ckpt.config = parse_config(config);
  } catch (const ConfigError& e) {
    throw DataError(fmt::format("checkpoint config: {}", e.what()));
  }
  if (expect_line(in, "rng") != "rng sample") {
    throw DataError("checkpoint: expected sample stream");
  }
  ckpt.sample_rng = expect_line(in, "sample stream");
  if (expect_line(in, "rng") != "rng augment") {
    throw DataError("checkpoint: expected augment stream");
  }
  ckpt.augment_rng = expect_line(in, "augment stream");
  ckpt.adam.step = keyed("adam_step");
  ckpt.params.user = read_table(in, "user");
  ckpt.params.item = read_table(in, "item");
  ckpt.params.item_basket = read_table(in, "item_basket");
  for (std::size_t t = 0; t < kTableNames.size(); ++t) {
    ckpt.adam.first[t] =
        read_table(in, fmt::format("adam_first_{}", kTableNames[t]));
    ckpt.adam.second[t] =
        read_table(in, fmt::format("adam_second_{}", kTableNames[t]));
  }
  if (expect_line(in, "end") != "end") {
    throw DataError("checkpoint: missing end marker");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::filesystem::filesystem_error(
        "cannot write checkpoint", path,
        std::make_error_code(std::errc::io_error));
  }
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::filesystem::filesystem_error(
        "cannot open checkpoint", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  }
  return read_checkpoint(in);
}

std::vector<std::size_t> batch_sizes(std::int64_t num_pairs, int batch_size) {
  std::vector<std::size_t> out;
  const auto size = static_cast<std::int64_t>(batch_size);
  for (std::int64_t done = 0; done < num_pairs; done += size) {
    out.push_back(static_cast<std::size_t>(std::min(size, num_pairs - done)));
  }
  return out;
}

Trainer::Trainer(const InteractionDataset& train, const TrainConfig& cfg)
    : cfg_(cfg),
      user_item_(build_user_item_graph(train)),
      basket_(build_basket_hypergraph(train)),
      sampler_(train),
      sample_rng_(Rng::stream(cfg.seed, "sample")),
      augment_rng_(Rng::stream(cfg.seed, "augment")) {
  cfg_.validate();
  plan_ = cfg_.use_ca_augmentation
              ? consistency_aware_plan(user_item_, basket_, cfg_.drop_rate)
              : uniform_plan(user_item_, basket_, cfg_.drop_rate);
  Rng init = Rng::stream(cfg_.seed, "init");
  params_ = init_params(train.num_users(), train.num_items(), cfg_, init);
  optimizer_ = Optimizer(cfg_, params_);
}

Trainer::Trainer(const InteractionDataset& train, const Checkpoint& ckpt)
    : Trainer(train, ckpt.config) {
  if (ckpt.params.user.rows() != params_.user.rows() ||
      ckpt.params.item.rows() != params_.item.rows() ||
      ckpt.params.user.cols() != params_.user.cols() ||
      ckpt.params.item_basket.rows() != params_.item_basket.rows()) {
    throw DataError("checkpoint tables do not match the training data");
  }
  params_ = ckpt.params;
  optimizer_.set_adam(ckpt.adam);
  sample_rng_.restore(ckpt.sample_rng);
  augment_rng_.restore(ckpt.augment_rng);
  epoch_ = ckpt.epoch;
}

EpochStats Trainer::train_epoch() {
  const auto start = std::chrono::steady_clock::now();
  const bool contrastive =
      cfg_.cross_behavior_active() || cfg_.within_behavior_active();
  const GraphViews original = graphs();

  // Fresh augmented views once per epoch; p = 0 leaves the graphs intact.
  std::optional<BipartiteView> aug_ui;
  std::optional<HypergraphView> aug_bi;
  GraphViews augmented = original;
  if (contrastive && cfg_.drop_rate > 0.0) {
    aug_ui = sample_view(user_item_, plan_.user_item, augment_rng_);
    aug_bi = sample_view(basket_, plan_.basket_item, augment_rng_);
    augmented = {&aug_ui->graph, &aug_bi->graph};
  }

  EpochStats stats;
  stats.epoch = epoch_ + 1;
  Gradients grads;
  const auto sizes =
      batch_sizes(static_cast<std::int64_t>(basket_.num_pins()), cfg_.batch_size);
  for (std::size_t size : sizes) {
    const auto triples = sampler_.sample(size, sample_rng_);
    const BatchLoss loss =
        batch_objective(params_, original, contrastive ? &augmented : nullptr,
                        triples, cfg_, &grads);
    const std::array<std::pair<std::string_view, double>, 4> parts = {{
        {"main", loss.main},
        {"cross-behavior", loss.cross},
        {"within-behavior", loss.within},
        {"total", loss.total},
    }};
    for (const auto& [name, value] : parts) {
      if (!std::isfinite(value)) {
        throw DivergenceError(fmt::format(
            "{} loss is not finite ({}) at epoch {} batch {}", name, value,
            stats.epoch, stats.batches + 1));
      }
    }
    optimizer_.step(params_, grads);
    stats.main += loss.main;
    stats.cross += loss.cross;
    stats.within += loss.within;
    stats.total += loss.total;
    ++stats.batches;
  }
  const double n = static_cast<double>(std::max<std::size_t>(stats.batches, 1));
  stats.main /= n;
  stats.cross /= n;
  stats.within /= n;
  stats.total /= n;
  ++epoch_;
  stats.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  return stats;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.config = cfg_;
  ckpt.epoch = epoch_;
  ckpt.params = params_;
  ckpt.adam = optimizer_.adam();
  ckpt.sample_rng = sample_rng_.state();
  ckpt.augment_rng = augment_rng_.state();
  return ckpt;
}

Representations inference_representations(const Trainer& trainer) {
  return encode(trainer.graphs(), trainer.params(), trainer.config().layers,
                trainer.config().use_hypergraph);
}

std::string epoch_record(const EpochStats& stats) {
  nlohmann::json j;
  j["epoch"] = stats.epoch;
  j["loss_main"] = stats.main;
  j["loss_cb"] = stats.cross;
  j["loss_wb"] = stats.within;
  j["total"] = stats.total;
  j["wall_time"] = stats.seconds;
  return j.dump();
}

FitResult fit(Trainer& trainer, const FitOptions& options) {
  FitResult result;
  const TrainConfig& cfg = trainer.config();
  while (trainer.epoch() < cfg.epochs) {
    const EpochStats stats = trainer.train_epoch();
    result.history.push_back(stats);
    if (options.log) *options.log << epoch_record(stats) << '\n';
    if (options.validate && cfg.eval_every > 0 &&
        trainer.epoch() % cfg.eval_every == 0) {
      const double score = options.validate(trainer);
      if (!result.best || score > result.best_score) {
        result.best = trainer.checkpoint();
        result.best_score = score;
      }
    }
  }
  result.last = trainer.checkpoint();
  return result;
}

FitResult fit(const InteractionDataset& train, const TrainConfig& cfg,
              const FitOptions& options) {
  Trainer trainer(train, cfg);
  return fit(trainer, options);
}

}  // namespace basketrec
