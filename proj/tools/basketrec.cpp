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

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "basketrec/config.hpp"
#include "basketrec/dataset.hpp"
#include "basketrec/errors.hpp"
#include "basketrec/evaluation.hpp"
#include "basketrec/trainer.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace basketrec;
using basketrec::cli::LockHeld;
using basketrec::cli::OutputLock;
using basketrec::cli::RunManifest;

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kData = 3,
  kEmpty = 4,
  kConfig = 5,
  kDivergence = 6,
  kSampling = 7,
  kLocked = 8,
  kDegenerate = 9,
  kInternal = 10,
};

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  usage error\n"
    "  2  missing or unreadable input, unwritable output\n"
    "  3  schema or data error in an input file\n"
    "  4  dataset empty after loading or filtering\n"
    "  5  invalid configuration\n"
    "  6  training diverged (non-finite loss)\n"
    "  7  negative sampling impossible\n"
    "  8  output directory locked by another run\n"
    "  9  zero-norm embedding in a contrastive term\n"
    "  10 internal error\n"
    "\n"
    "Configuration precedence, lowest first: built-in defaults, --dataset\n"
    "defaults, --config file, --preset, BASKETREC_<KEY> environment\n"
    "variables (e.g. BASKETREC_LEARNING_RATE), --set key=value, --seed.\n";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw fs::filesystem_error(
        "cannot open input", path,
        std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw fs::filesystem_error("cannot write output", path,
                               std::make_error_code(std::errc::io_error));
  }
}

struct ModelOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::string preset;
  std::string dataset;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file");
    app->add_option("--set", sets, "override one key (repeatable)")
        ->type_name("KEY=VALUE");
    app->add_option("--preset", preset,
                    "full|lightgcn-only|hypergraph-only|no-ca|no-fusion|"
                    "random-aug|additive");
    app->add_option("--dataset", dataset,
                    "instacart|tafeng|valuedshoppers loss-weight defaults");
    app->add_option("--seed", seed, "random seed");
  }

  TrainConfig resolve() const {
    TrainConfig cfg;
    if (!dataset.empty()) apply_dataset_defaults(cfg, dataset);
    if (!config_path.empty()) apply_config_text(cfg, read_text(config_path));
    if (!preset.empty()) apply_preset(cfg, preset);
    for (const auto& key : config_keys()) {
      std::string name = "BASKETREC_";
      for (char c : key) name += static_cast<char>(std::toupper(c));
      if (const char* value = std::getenv(name.c_str())) {
        set_config_value(cfg, key, value);
      }
    }
    apply_overrides(cfg, sets);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }

  std::vector<fs::path> inputs() const {
    if (config_path.empty()) return {};
    return {config_path};
  }
};

std::vector<std::size_t> parse_k_list(const std::vector<std::size_t>& ks) {
  if (ks.empty()) return default_k_list();
  for (auto k : ks) {
    if (k == 0) throw ConfigError("K values must be at least 1");
  }
  return ks;
}

RunManifest base_manifest(std::string command, int argc, char** argv) {
  RunManifest m;
  m.command = std::move(command);
  m.argv.assign(argv, argv + argc);
  return m;
}

std::string join(const std::vector<std::size_t>& values) {
  return fmt::format("{}", fmt::join(values, ","));
}

// prepare ------------------------------------------------------------------

struct PrepareOptions {
  std::vector<std::string> inputs;
  std::string orders;
  Schema schema;
  std::size_t min_basket_size = 30;
  double ratio = 0.8;
  std::uint64_t seed = 42;
  std::string out;
};

int run_prepare(const PrepareOptions& o, RunManifest m) {
  const fs::path out = o.out;
  fs::create_directories(out);
  OutputLock lock(out);
  m.seed = o.seed;
  m.inputs.assign(o.inputs.begin(), o.inputs.end());
  if (!o.orders.empty()) m.inputs.push_back(o.orders);
  m.parameters = {{"user_col", o.schema.user_col},
                  {"basket_col", o.schema.basket_col},
                  {"item_col", o.schema.item_col},
                  {"min_basket_size", std::to_string(o.min_basket_size)},
                  {"train_ratio", fmt::format("{}", o.ratio)},
                  {"orders", o.orders}};
  m.outputs = {out / "split.txt", out / "stats.tsv"};
  cli::write_manifest(out, m);

  std::vector<fs::path> paths(o.inputs.begin(), o.inputs.end());
  std::optional<fs::path> orders;
  if (!o.orders.empty()) orders = o.orders;
  const InteractionDataset raw = load_transactions(paths, o.schema, orders);
  const InteractionDataset kept = filter_baskets(raw, o.min_basket_size);
  if (kept.num_baskets() == 0) {
    throw EmptyDatasetError(fmt::format(
        "no basket has at least {} items", o.min_basket_size));
  }
  const SplitDataset split = split_within_basket(kept, o.ratio, o.seed);
  save_split(out / "split.txt", split);
  write_text(out / "stats.tsv", format_stats(compute_stats(kept), "filtered") +
                                    "\n" +
                                    format_stats(compute_stats(raw), "raw"));
  std::cout << format_stats(compute_stats(kept), "filtered");
  return kOk;
}

// train --------------------------------------------------------------------

struct TrainOptions {
  ModelOptions model;
  std::string split;
  std::string resume;
  std::string out;
};

int run_train(const TrainOptions& o, RunManifest m) {
  const fs::path out = o.out;
  fs::create_directories(out);
  OutputLock lock(out);
  std::optional<Checkpoint> resume;
  TrainConfig cfg;
  if (!o.resume.empty()) {
    resume = load_checkpoint(o.resume);
    // Only the epoch budget may change; anything else would fork the run.
    for (const auto& item : o.model.sets) {
      if (item.substr(0, item.find('=')) != "epochs") {
        throw ConfigError("--resume accepts only --set epochs=N");
      }
    }
    apply_overrides(resume->config, o.model.sets);
    resume->config.validate();
    cfg = resume->config;
  } else {
    cfg = o.model.resolve();
  }
  m.seed = cfg.seed;
  m.config = config_map(cfg);
  m.inputs = o.model.inputs();
  m.inputs.push_back(o.split);
  if (resume) m.inputs.push_back(o.resume);
  m.outputs = {out / "checkpoint.bin", out / "train_log.ndjson",
               out / "config.txt"};
  if (cfg.eval_every > 0) m.outputs.push_back(out / "best.bin");
  cli::write_manifest(out, m);

  const SplitDataset split = load_split(o.split);
  write_text(out / "config.txt", serialize_config(cfg));
  Trainer trainer = resume ? Trainer(split.train, *resume)
                           : Trainer(split.train, cfg);
  std::ofstream log(out / "train_log.ndjson",
                    resume ? std::ios::app : std::ios::trunc);
  FitOptions fit_options;
  fit_options.log = &log;
  const auto cases = heldout_cases(split);
  const std::vector<std::size_t> eval_k = {
      static_cast<std::size_t>(cfg.eval_k)};
  fit_options.validate = [&](const Trainer& t) {
    return evaluate(inference_representations(t), cases, eval_k, cfg)
        .rows[0]
        .recall;
  };
  const FitResult result = fit(trainer, fit_options);
  save_checkpoint(out / "checkpoint.bin", result.last);
  if (result.best) save_checkpoint(out / "best.bin", *result.best);
  if (!result.history.empty()) {
    const auto& last = result.history.back();
    std::cout << fmt::format("epoch {} total loss {:.6f}\n", last.epoch,
                             last.total);
  }
  return kOk;
}

// evaluate -----------------------------------------------------------------

struct EvaluateOptions {
  std::string checkpoint;
  std::string split;
  std::vector<std::size_t> ks;
  std::string out;
};

int run_evaluate(const EvaluateOptions& o, RunManifest m) {
  const fs::path out = o.out;
  fs::create_directories(out);
  OutputLock lock(out);
  const auto ks = parse_k_list(o.ks);
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  m.seed = ckpt.config.seed;
  m.config = config_map(ckpt.config);
  m.parameters = {{"k", join(ks)}};
  m.inputs = {o.checkpoint, o.split};
  m.outputs = {out / "metrics.tsv", out / "metrics.json"};
  cli::write_manifest(out, m);

  const SplitDataset split = load_split(o.split);
  const Trainer trainer(split.train, ckpt);
  const auto cases = heldout_cases(split);
  const MetricsReport report =
      evaluate(inference_representations(trainer), cases, ks, ckpt.config);
  write_text(out / "metrics.tsv", metrics_tsv(report));
  write_text(out / "metrics.json", metrics_json(report));
  std::cout << metrics_tsv(report);
  return kOk;
}

// ablate -------------------------------------------------------------------

struct AblateOptions {
  ModelOptions model;
  std::string split;
  std::vector<std::string> presets;
  std::vector<std::size_t> ks;
  std::string out;
};

int run_ablate(const AblateOptions& o, RunManifest m) {
  const fs::path out = o.out;
  fs::create_directories(out);
  OutputLock lock(out);
  const auto ks = parse_k_list(o.ks);
  const TrainConfig base = o.model.resolve();
  const std::vector<std::string> presets =
      o.presets.empty() ? preset_names() : o.presets;
  for (const auto& name : presets) {
    TrainConfig probe = base;
    apply_preset(probe, name);
  }
  m.seed = base.seed;
  m.config = config_map(base);
  m.parameters = {{"k", join(ks)},
                  {"presets", fmt::format("{}", fmt::join(presets, ","))}};
  m.inputs = o.model.inputs();
  m.inputs.push_back(o.split);
  for (const auto& name : presets) m.outputs.push_back(out / name / "metrics.tsv");
  m.outputs.push_back(out / "ablation.tsv");
  cli::write_manifest(out, m);

  const SplitDataset split = load_split(o.split);
  std::string table = "preset\tk\trecall\tprecision\thit_ratio\tndcg\n";
  for (const auto& name : presets) {
    TrainConfig cfg = base;
    apply_preset(cfg, name);
    const MetricsReport report = train_and_evaluate(split, cfg, ks);
    fs::create_directories(out / name);
    write_text(out / name / "metrics.tsv", metrics_tsv(report));
    write_text(out / name / "metrics.json", metrics_json(report));
    for (const auto& row : report.rows) {
      table += fmt::format("{}\t{}\t{:.10f}\t{:.10f}\t{:.10f}\t{:.10f}\n", name,
                           row.k, row.recall, row.precision, row.hit_ratio,
                           row.ndcg);
    }
  }
  write_text(out / "ablation.tsv", table);
  std::cout << table;
  return kOk;
}

// noise-sweep --------------------------------------------------------------

struct NoiseOptions {
  ModelOptions model;
  std::string split;
  std::vector<double> ratios = {0.0, 0.2, 0.4, 0.6, 0.8};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::size_t> ks;
  std::string out;
};

int run_noise_sweep(const NoiseOptions& o, RunManifest m) {
  const fs::path out = o.out;
  fs::create_directories(out);
  OutputLock lock(out);
  const auto ks = parse_k_list(o.ks);
  const TrainConfig cfg = o.model.resolve();
  for (double r : o.ratios) {
    if (!(r >= 0.0)) throw ConfigError("noise ratios must be non-negative");
  }
  m.seed = cfg.seed;
  m.config = config_map(cfg);
  m.parameters = {{"k", join(ks)},
                  {"ratios", fmt::format("{}", fmt::join(o.ratios, ","))},
                  {"seeds", fmt::format("{}", fmt::join(o.seeds, ","))}};
  m.inputs = o.model.inputs();
  m.inputs.push_back(o.split);
  auto run_name = [](double ratio, std::uint64_t seed, std::string_view v) {
    return fmt::format("ratio_{}_seed_{}_{}.tsv", ratio, seed, v);
  };
  for (double r : o.ratios) {
    for (auto s : o.seeds) {
      for (std::string_view v : {"full", "lightgcn-only"}) {
        m.outputs.push_back(out / run_name(r, s, v));
      }
    }
  }
  m.outputs.push_back(out / "curve.tsv");
  cli::write_manifest(out, m);

  const SplitDataset split = load_split(o.split);
  const auto runs = noise_sweep(split, cfg, o.ratios, o.seeds, ks);
  for (const auto& run : runs) {
    write_text(out / run_name(run.ratio, run.seed, run.variant),
               metrics_tsv(run.report));
  }
  write_text(out / "curve.tsv", curve_tsv(runs));
  std::cout << curve_tsv(runs);
  return kOk;
}

int report(int code, std::string_view kind, std::string_view message) {
  std::cerr << "basketrec: " << kind << ": " << message << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Within-basket recommendation: data preparation, training, "
               "evaluation and robustness experiments."};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  PrepareOptions prepare;
  auto* prep = app.add_subcommand(
      "prepare", "Filter raw transactions, split baskets, report statistics");
  prep->add_option("inputs", prepare.inputs, "transaction files (csv/tsv)")
      ->required();
  prep->add_option("--orders", prepare.orders,
                   "orders file mapping basket to user when the transaction "
                   "files lack the user column");
  prep->add_option("--user-col", prepare.schema.user_col)->capture_default_str();
  prep->add_option("--basket-col", prepare.schema.basket_col)
      ->capture_default_str();
  prep->add_option("--item-col", prepare.schema.item_col)->capture_default_str();
  prep->add_option("--min-basket-size", prepare.min_basket_size)
      ->capture_default_str();
  prep->add_option("--ratio", prepare.ratio, "train share of each basket")
      ->capture_default_str();
  prep->add_option("--seed", prepare.seed)->capture_default_str();
  prep->add_option("--out", prepare.out, "output directory")->required();

  TrainOptions train;
  auto* tr = app.add_subcommand("train", "Train a model on a prepared split");
  train.model.attach(tr);
  tr->add_option("--split", train.split, "split file from prepare")->required();
  tr->add_option("--resume", train.resume,
                 "continue from a checkpoint (with --set epochs=N to extend)");
  tr->add_option("--out", train.out, "output directory")->required();

  EvaluateOptions eval;
  auto* ev = app.add_subcommand("evaluate", "Rank heldout items of a split");
  ev->add_option("--checkpoint", eval.checkpoint)->required();
  ev->add_option("--split", eval.split)->required();
  ev->add_option("--k", eval.ks, "cutoffs (default 5,10,20,40,60,80,100)")
      ->delimiter(',');
  ev->add_option("--out", eval.out, "output directory")->required();

  AblateOptions ablate;
  auto* ab = app.add_subcommand("ablate", "Train and evaluate each preset");
  ablate.model.attach(ab);
  ab->add_option("--split", ablate.split)->required();
  ab->add_option("--presets", ablate.presets, "presets to run (default all)")
      ->delimiter(',');
  ab->add_option("--k", ablate.ks)->delimiter(',');
  ab->add_option("--out", ablate.out, "output directory")->required();

  NoiseOptions noise;
  auto* ns = app.add_subcommand(
      "noise-sweep", "Robustness to fabricated basket memberships");
  noise.model.attach(ns);
  ns->add_option("--split", noise.split)->required();
  ns->add_option("--ratios", noise.ratios)->delimiter(',')->capture_default_str();
  ns->add_option("--seeds", noise.seeds)->delimiter(',')->capture_default_str();
  ns->add_option("--k", noise.ks)->delimiter(',');
  ns->add_option("--out", noise.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (prep->parsed()) {
      return run_prepare(prepare, base_manifest("prepare", argc, argv));
    }
    if (tr->parsed()) return run_train(train, base_manifest("train", argc, argv));
    if (ev->parsed()) {
      return run_evaluate(eval, base_manifest("evaluate", argc, argv));
    }
    if (ab->parsed()) {
      return run_ablate(ablate, base_manifest("ablate", argc, argv));
    }
    if (ns->parsed()) {
      return run_noise_sweep(noise, base_manifest("noise-sweep", argc, argv));
    }
  } catch (const fs::filesystem_error& e) {
    return report(kIo, "i/o error",
                  fmt::format("{}: {}", e.path1().string(), e.what()));
  } catch (const LockHeld& e) {
    return report(kLocked, "locked", e.what());
  } catch (const SchemaError& e) {
    return report(kData, "schema error", e.what());
  } catch (const DataError& e) {
    return report(kData, "data error", e.what());
  } catch (const EmptyDatasetError& e) {
    return report(kEmpty, "empty dataset", e.what());
  } catch (const ConfigError& e) {
    return report(kConfig, "config error", e.what());
  } catch (const DivergenceError& e) {
    return report(kDivergence, "diverged", e.what());
  } catch (const SamplingError& e) {
    return report(kSampling, "sampling error", e.what());
  } catch (const DegenerateEmbeddingError& e) {
    return report(kDegenerate, "degenerate embedding", e.what());
  } catch (const std::exception& e) {
    return report(kInternal, "internal error", e.what());
  }
  return kUsage;
}
