/* Copyright 2026 The DSGL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// dsgl: generate data, train, evaluate and ablate from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsgl/core/errors.h"
#include "dsgl/data/events.h"
#include "dsgl/data/split.h"
#include "dsgl/data/synth.h"
#include "dsgl/graph/dsg.h"
#include "dsgl/metrics/metrics.h"
#include "dsgl/model/checkpoint.h"
#include "dsgl/model/model.h"
#include "dsgl/train/pipeline.h"
#include "dsgl/train/trainer.h"

namespace fs = std::filesystem;

namespace dsgl {
namespace {

// Config keys, in the order flag overrides are applied. `depth` comes before
// the fanout lists so explicit lists win.
const std::vector<std::string> kValueKeys = {
    "seed",       "train_frac", "valid_frac",     "index_scope",      "depth",
    "user_fanouts", "item_fanouts", "batch_size", "chunk_nodes", "lr",               "beta1",
    "beta2",      "adam_eps",   "max_steps",      "eval_every",       "patience",
    "precision",  "d_user",     "d_item",         "d_cat",            "d_time",
    "hidden",     "heads",      "mlp_hidden",     "time_base",        "num_time_buckets",
    "ablate",     "loss_reduction"};

std::string FlagName(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

// Shared configuration options of the data and model commands.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool attn_scale_outside = false;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file; flags override it");
    for (const auto& key : kValueKeys) {
      app->add_option(FlagName(key), values[key], "config key " + key);
    }
    app->add_flag("--attn-scale-outside", attn_scale_outside,
                  "apply the 1/sqrt(d) scale after the softmax");
  }

  RunConfig Resolve() const {
    RunConfig rc;
    rc.train.precision = PrecisionFromEnv();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot open config file '" + config_path + "'");
      try {
        ApplyRunConfigText(rc, in);
      } catch (const Error& e) {
        throw Error(config_path + ": " + e.what());
      }
    }
    for (const auto& key : kValueKeys) {
      const std::string& v = values.at(key);
      if (!v.empty()) SetRunConfigKey(rc, key, v);
    }
    if (attn_scale_outside) rc.model.attn_scale_outside = true;
    return rc;
  }
};

EventLog ReadLog(const std::string& path) {
  try {
    return LoadEvents(path);
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir + "'");
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

std::string Fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

std::string Echo(const RunConfig& rc, const std::string& input) {
  return "# input=" + input + "\n" + RunConfigToText(rc);
}

struct TrainOutcome {
  RunReport report;
  EvalResult test;
  std::optional<double> popularity_auc;
};

// Split, train, checkpoint and score the test split. Writes config.echo,
// report.log and checkpoint.bin into `dir`.
TrainOutcome TrainAndTest(const EventLog& log, const std::string& input, RunConfig rc,
                          const std::string& dir, std::ostream* progress) {
  EnsureDir(dir);
  Experiment ex = PrepareExperiment(log, rc);
  ValidateModelConfig(rc.model);
  WriteText(fs::path(dir) / "config.echo", Echo(rc, input));
  DsglModel model(rc.model);
  TrainOutcome out;
  out.report = Train(model, ex.train_index, ex.train, ex.valid, rc.train, progress);
  std::ostringstream report;
  WriteReport(report, out.report);
  WriteText(fs::path(dir) / "report.log", report.str());
  SaveCheckpoint((fs::path(dir) / "checkpoint.bin").string(), model,
                 static_cast<std::uint64_t>(out.report.best_step),
                 rc.train.precision == Precision::kF32 ? 32 : 64);
  out.test = Evaluate(model, ex.test_index, ex.test);
  std::vector<Real> labels;
  for (const auto& s : ex.test) labels.push_back(s.label);
  try {
    out.popularity_auc = Auc(PopularityScores(ex, ex.test), labels);
  } catch (const UndefinedMetricError&) {
  }
  return out;
}

std::string AucText(const std::optional<double>& auc) {
  return auc ? Fixed(*auc) : "undefined";
}

int CmdGen(const SynthConfig& cfg, const std::string& out) {
  const EventLog log = GenerateSynthetic(cfg);
  SaveEvents(out, log.events);
  std::cout << "wrote " << log.size() << " events to " << out << '\n';
  return 0;
}

int CmdSplit(const std::string& input, const std::string& dir, const ConfigOptions& opts) {
  RunConfig rc = opts.Resolve();
  const EventLog log = ReadLog(input);
  const TemporalSplit split = SplitTemporally(log, rc.train_frac, rc.valid_frac);
  EnsureDir(dir);
  const std::pair<const char*, const EventLog*> parts[] = {
      {"train.csv", &split.train}, {"valid.csv", &split.valid}, {"test.csv", &split.test}};
  for (const auto& [name, part] : parts) {
    SaveEvents((fs::path(dir) / name).string(), part->events);
    std::cout << name << ' ' << part->size() << '\n';
  }
  return 0;
}

int CmdTrain(const std::string& input, const std::string& dir, const ConfigOptions& opts) {
  const RunConfig rc = opts.Resolve();
  const EventLog log = ReadLog(input);
  const TrainOutcome out = TrainAndTest(log, input, rc, dir, &std::cout);
  std::cout << "best_step=" << out.report.best_step << " best_auc=" << Fixed(out.report.best_valid_auc)
            << " reason=" << out.report.stopped_reason << '\n'
            << "test auc=" << AucText(out.test.auc) << " logloss=" << Fixed(out.test.logloss) << '\n'
            << "popularity auc=" << AucText(out.popularity_auc) << '\n';
  return 0;
}

int CmdEval(const std::string& input, const std::string& checkpoint, ConfigOptions opts) {
  Checkpoint ckpt;
  try {
    ckpt = LoadCheckpoint(checkpoint);
  } catch (const Error& e) {
    throw Error(checkpoint + ": " + e.what());
  }
  // The test split is resampled with the training seed unless overridden.
  if (opts.values["seed"].empty()) opts.values["seed"] = std::to_string(ckpt.seed);
  RunConfig rc = opts.Resolve();
  const EventLog log = ReadLog(input);
  const Experiment ex = PrepareExperiment(log, rc);
  const DsglModel model(ckpt.config, std::move(ckpt.params));
  const EvalResult r = Evaluate(model, ex.test_index, ex.test);
  std::cout << "auc=" << AucText(r.auc) << " logloss=" << Fixed(r.logloss) << '\n';
  RequireAuc(r);
  return 0;
}

const std::vector<std::string> kVariants = {"full",    "no_time",  "no_seq_enc", "no_tase",
                                            "no_att",  "no_taatt", "no_paatt",   "no_lc",
                                            "layer1",  "layer2",   "layer3"};

// Applies an ablation variant name: a layerK depth, or flags joined by '+'.
void ApplyVariant(RunConfig& rc, const std::string& variant) {
  rc.model.ablation = Ablation{};
  if (variant.rfind("layer", 0) == 0) {
    SetRunConfigKey(rc, "depth", variant.substr(5));
  } else {
    SetRunConfigKey(rc, "ablate", variant);
  }
}

int CmdAblate(const std::string& input, const std::string& dir, const ConfigOptions& opts,
              const std::vector<std::string>& variants) {
  const RunConfig base = opts.Resolve();
  const EventLog log = ReadLog(input);
  EnsureDir(dir);
  WriteText(fs::path(dir) / "config.echo", Echo(base, input));
  std::ostringstream tsv;
  tsv << "variant\tauc\tlogloss\tstatus\n";
  std::cout << std::left << std::setw(20) << "variant" << std::setw(12) << "auc" << std::setw(12)
            << "logloss" << "status\n";
  bool all_ok = true;
  for (const auto& variant : variants) {
    std::string auc = "-", logloss = "-", status = "ok";
    try {
      RunConfig rc = base;
      ApplyVariant(rc, variant);
      const TrainOutcome out = TrainAndTest(log, input, rc, (fs::path(dir) / variant).string(), nullptr);
      auc = AucText(out.test.auc);
      logloss = Fixed(out.test.logloss);
    } catch (const std::exception& e) {
      status = std::string("error: ") + e.what();
      all_ok = false;
    }
    tsv << variant << '\t' << auc << '\t' << logloss << '\t' << status << '\n';
    std::cout << std::setw(20) << variant << std::setw(12) << auc << std::setw(12) << logloss << status
              << std::endl;
  }
  WriteText(fs::path(dir) / "ablate.tsv", tsv.str());
  return all_ok ? 0 : 1;
}

int CmdInspect(const std::string& input, std::size_t row, const ConfigOptions& opts) {
  RunConfig rc = opts.Resolve();
  const EventLog log = ReadLog(input);
  if (row >= log.size()) {
    throw IndexError("event " + std::to_string(row) + " out of range; " + input + " has " +
                     std::to_string(log.size()) + " events");
  }
  ValidateDsgSpec(rc.model.dsg);
  // Strict tau < t keeps the full-log index causal for any one sample.
  const BehaviorIndex index(log);
  const InteractionEvent& e = log.events[row];
  const auto& spec = rc.model.dsg;
  std::cout << FormatDsg(BuildDsg(index, Side::kUser, e.user_id, 0, e.timestamp, spec.user_fanouts),
                         Side::kUser)
            << FormatDsg(BuildDsg(index, Side::kItem, e.item_id, e.category_id, e.timestamp,
                                  spec.item_fanouts),
                         Side::kItem);
  const std::vector<InteractionEvent> one = {e};
  DumpBatch(std::cout, BatchDsgs(index, one, spec));
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"Dynamic sequential graph CTR models: data, training and evaluation"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a synthetic event log");
  gen->add_option("--users", synth.num_users);
  gen->add_option("--items", synth.num_items);
  gen->add_option("--clusters", synth.num_clusters);
  gen->add_option("--events", synth.num_events);
  gen->add_option("--drift", synth.drift_prob, "per-event cluster switch probability");
  gen->add_option("--noise", synth.noise_prob, "per-event uniform item probability");
  gen->add_option("--seed", synth.seed);
  gen->add_option("-o,--out", gen_out, "output event file")->required();

  std::string input, out_dir, checkpoint;
  ConfigOptions opts;
  const auto data_command = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("-i,--input", input, "event file")->required();
    opts.Register(cmd);
    return cmd;
  };
  auto* split = data_command("split", "write train/valid/test event files");
  split->add_option("-o,--out-dir", out_dir)->required();
  auto* train = data_command("train", "train and write config.echo, report.log, checkpoint.bin");
  train->add_option("-o,--out-dir", out_dir)->required();
  auto* eval = data_command("eval", "score a checkpoint on the test split");
  eval->add_option("-c,--checkpoint", checkpoint)->required();
  std::vector<std::string> variants = kVariants;
  auto* ablate = data_command("ablate", "train every ablation variant with a shared seed");
  ablate->add_option("-o,--out-dir", out_dir)->required();
  ablate->add_option("--variants", variants, "variants to run (default: all)")->delimiter(',');
  std::size_t row = 0;
  auto* inspect = data_command("inspect-dsg", "print one event's graphs with time decays and masks");
  inspect->add_option("--row", row, "0-based event position in the time-sorted log");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return CmdGen(synth, gen_out);
    if (split->parsed()) return CmdSplit(input, out_dir, opts);
    if (train->parsed()) return CmdTrain(input, out_dir, opts);
    if (eval->parsed()) return CmdEval(input, checkpoint, opts);
    if (ablate->parsed()) return CmdAblate(input, out_dir, opts, variants);
    if (inspect->parsed()) return CmdInspect(input, row, opts);
  } catch (const std::exception& e) {
    std::cerr << "dsgl: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace
}  // namespace dsgl

int main(int argc, char** argv) { return dsgl::Main(argc, argv); }
