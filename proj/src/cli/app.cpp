#include "hcn/cli/app.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hcn/babi/pack.hpp"
#include "hcn/cli/setup.hpp"
#include "hcn/engine/session.hpp"
#include "hcn/eval/accuracy.hpp"
#include "hcn/eval/curve.hpp"
#include "hcn/eval/rl.hpp"
#include "hcn/neural/checkpoint.hpp"
#include "hcn/training/reinforce.hpp"
#include "hcn/training/supervised.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"
#include "hcn/util/log.hpp"

namespace hcn::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEvalSeed = 424242;

training::SlConfig sl_config(const RunConfig& c) {
  training::SlConfig sl;
  sl.hidden = c.hidden;
  sl.epochs = c.epochs;
  sl.epoch_cap = c.epoch_cap;
  sl.stop_at_train_acc = c.stop_at_train_acc;
  sl.shuffle = c.shuffle;
  sl.seed = c.seed;
  return sl;
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_run_config(const fs::path& path, const RunConfig& c) {
  io::write_file_atomic(path, format_run_config(c));
}

neural::LstmParameters load_model(const RunConfig& c, const Experiment& e) {
  auto params = neural::load_checkpoint(c.ckpt).params;
  if (params.shape.obs_size != e.obs_size() || params.shape.action_count != e.action_count())
    throw DimensionError(fmt::format(
        "checkpoint {} expects {} features and {} actions; this setup has {} and {}", c.ckpt,
        params.shape.obs_size, params.shape.action_count, e.obs_size(), e.action_count()));
  return params;
}

std::vector<std::pair<std::string, double>> evaluate(const neural::LstmParameters& params,
                                                     const Experiment& e) {
  const auto report = eval::turn_and_dialog_accuracy(params, *e.eval_pack, e.test);
  std::vector<std::pair<std::string, double>> m{
      {"turn_accuracy", report.turn_accuracy},
      {"dialog_accuracy", report.dialog_accuracy},
      {"test_dialogs", static_cast<double>(e.test.size())},
      {"test_turns", static_cast<double>(report.turns)}};
  if (e.config.task == TaskKind::dialer) {
    dialer::UserSimulator sim(e.directory, e.simulator);
    m.emplace_back("success_rate", eval::rl_success_rate(params, *e.eval_pack, *e.featurizer, sim,
                                                         e.config.eval_episodes, kEvalSeed));
  }
  return m;
}

void print_metrics(std::ostream& out, const std::vector<std::pair<std::string, double>>& m) {
  for (const auto& [k, v] : m) {
    if (v > 1.0 && std::floor(v) == v)
      fmt::print(out, "{:<16} {:.0f}\n", k, v);
    else
      fmt::print(out, "{:<16} {:.4f}\n", k, v);
  }
}

int run_train(const RunConfig& c, std::ostream& out) {
  const auto e = prepare_experiment(c);
  auto params = neural::init_parameters(e.obs_size(), e.action_count(), c.hidden, c.seed);
  auto optimizer = neural::AdaDeltaState::zeros(params.shape);
  training::MetricsLog log;
  training::train_supervised(params, optimizer, e.train, sl_config(c), std::ref(log));

  const fs::path ckpt = c.out.empty() ? fs::path("model.ckpt") : fs::path(c.out);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  neural::save_checkpoint(ckpt, params, &optimizer);
  auto saved = c;
  saved.out = ckpt.string();
  write_run_config(run_config_path_for(ckpt), saved);
  io::write_file_atomic(fs::path(ckpt.string() + ".metrics.csv"), log.csv());
  io::write_file_atomic(fs::path(ckpt.string() + ".templates.tsv"),
                        babi::format_template_inventory(e.train_pack->templates()));

  fmt::print(out, "task {}: {} training dialogs, {} actions, {} epochs\n", task_name(c.task),
             e.train.size(), e.action_count(), log.rows().size());
  fmt::print(out, "{:<16} {:.4f}\n", "train_accuracy", training::label_accuracy(params, e.train));
  print_metrics(out, evaluate(params, e));
  fmt::print(out, "checkpoint       {}\n", ckpt.string());
  return kOk;
}

int run_eval(const RunConfig& c, std::ostream& out) {
  const auto e = prepare_experiment(c);
  const auto params = load_model(c, e);
  const auto metrics = evaluate(params, e);
  const auto dir = output_dir(c);
  io::write_file_atomic(dir / "report.csv", eval::report_csv(metrics));
  write_run_config(dir / "run_config.cfg", c);
  print_metrics(out, metrics);
  fmt::print(out, "report           {}\n", (dir / "report.csv").string());
  return kOk;
}

int run_curve(const RunConfig& c, std::ostream& out) {
  const auto e = prepare_experiment(c);
  eval::CurveConfig cc;
  cc.sizes = parse_sizes(c.sizes, e.train.size());
  cc.runs = c.runs;
  cc.sl = sl_config(c);
  cc.seed = c.seed;
  const auto curve = eval::learning_curve(e.train, e.test, *e.eval_pack, e.obs_size(), cc);
  const auto dir = output_dir(c);
  io::write_file_atomic(dir / "curve.csv", curve.csv());
  write_run_config(dir / "run_config.cfg", c);
  fmt::print(out, "{:>8} {:>10}\n", "size", "accuracy");
  for (const auto& row : curve.rows) fmt::print(out, "{:>8} {:>10.4f}\n", row.size, row.mean_turn_accuracy);
  fmt::print(out, "curve            {}\n", (dir / "curve.csv").string());
  return kOk;
}

int run_rl(const RunConfig& c, std::ostream& out) {
  const auto e = prepare_experiment(c, false);
  const auto dir = output_dir(c);
  std::string curve_csv = "dialogs,run,success_rate\n";
  std::vector<std::vector<training::RlCurvePoint>> curves;
  neural::LstmParameters last;
  for (std::size_t run = 0; run < c.runs; ++run) {
    const std::uint64_t seed = c.seed + run;
    auto params = c.ckpt.empty()
                      ? neural::init_parameters(e.obs_size(), e.action_count(), c.hidden, seed)
                      : load_model(c, e);
    std::vector<engine::EncodedDialog> sl_set;
    if (c.sl_init > 0) {
      sl_set = dialer_oracle_dialogs(e, c.sl_init, seed * 1000 + 3);
      auto sl = sl_config(c);
      sl.seed = seed;
      auto optimizer = neural::AdaDeltaState::zeros(params.shape);
      training::train_supervised(params, optimizer, sl_set, sl);
    }
    std::optional<training::InterleaveSchedule> schedule;
    if (c.interleave)
      schedule = training::InterleaveSchedule{
          dialer_oracle_dialogs(e, (c.rl_dialogs + c.interleave_every - 1) / c.interleave_every,
                                seed * 1000 + 4),
          c.interleave_every};

    training::RlConfig rl;
    rl.dialogs = c.rl_dialogs;
    rl.seed = seed * 1000 + 5;
    rl.restore_epoch_cap = c.epoch_cap;
    dialer::UserSimulator train_sim(e.directory, e.simulator);
    dialer::UserSimulator eval_sim(e.directory, e.simulator);
    training::MetricsLog log;
    training::RlHooks hooks;
    hooks.metrics = std::ref(log);
    hooks.evaluate = [&](const neural::LstmParameters& p) {
      return eval::rl_success_rate(p, *e.eval_pack, *e.featurizer, eval_sim, c.eval_episodes,
                                   kEvalSeed);
    };
    const auto result = training::run_rl(params, rl, *e.train_pack, *e.featurizer, train_sim,
                                         std::move(sl_set), std::move(schedule), hooks);
    for (const auto& p : result.curve)
      curve_csv += fmt::format("{},{},{:.6f}\n", p.dialogs, run, p.success_rate);
    io::write_file_atomic(dir / fmt::format("metrics_run{}.csv", run), log.csv());
    curves.push_back(result.curve);
    last = std::move(params);
    fmt::print(out, "run {}: final success rate {:.4f}, {} restorations\n", run,
               result.curve.empty() ? 0.0 : result.curve.back().success_rate,
               result.restorations);
  }
  io::write_file_atomic(dir / "rl_curve.csv", curve_csv);
  neural::save_checkpoint(dir / "model.ckpt", last);
  write_run_config(dir / "run_config.cfg", c);
  auto model_cfg = c;
  model_cfg.mode = Mode::train;
  model_cfg.ckpt.clear();
  write_run_config(run_config_path_for(dir / "model.ckpt"), model_cfg);

  fmt::print(out, "{:>8} {:>12}\n", "dialogs", "success");
  for (std::size_t i = 0; i < curves.front().size(); ++i) {
    double sum = 0.0;
    for (const auto& curve : curves) sum += curve[i].success_rate;
    fmt::print(out, "{:>8} {:>12.4f}\n", curves.front()[i].dialogs,
               sum / static_cast<double>(curves.size()));
  }
  fmt::print(out, "curve            {}\n", (dir / "rl_curve.csv").string());
  return kOk;
}

int run_chat(const RunConfig& c, std::istream& in, std::ostream& out) {
  const auto e = prepare_experiment(c, false);
  const auto params = load_model(c, e);
  const bool events = c.task == TaskKind::dialer;
  fmt::print(out, "{}\n", events ? "type user events such as 'say firstname=Joe lastname=Adamson'; "
                                   "an empty line is silence; 'reset' restarts, 'quit' exits"
                                 : "type user utterances; an empty line is silence; "
                                   "'reset' restarts, 'quit' exits");
  std::mt19937_64 rng(c.seed);
  auto session = engine::new_session(*e.eval_pack, *e.featurizer, params);
  std::string line;
  while (out << "> " << std::flush, std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "quit" || line == "exit") break;
    if (line == "reset") {
      session = engine::new_session(*e.eval_pack, *e.featurizer, params);
      fmt::print(out, "(new dialog)\n");
      continue;
    }
    std::string text = line;
    if (events && text.rfind("say ", 0) == 0) text = text.substr(4);
    for (const auto& step : session.respond(text, engine::SelectionMode::greedy, rng)) {
      if (step.kind == engine::ActionKind::api) {
        fmt::print(out, "API: {}\n", step.rendered);
        if (!step.api_result.empty()) fmt::print(out, "     {}\n", step.api_result);
      } else {
        fmt::print(out, "SYS: {}\n", step.rendered);
      }
    }
  }
  return kOk;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::istream& in, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Hybrid Code Networks: train, evaluate and talk to dialog policies"};
  app.set_version_flag("--version", "hcn 1.0");
  app.fallthrough();
  app.require_subcommand(0, 1);

  KeyValues flags;
  auto value = [&](const std::string& names, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(
        names, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  auto toggle = [&](const std::string& names, const std::string& key, const std::string& help) {
    app.add_flag_function(
        names, [&flags, key](std::int64_t n) { flags[key] = n > 0 ? "true" : "false"; }, help);
  };
  std::string config_file;
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "key = value settings file (flags win)");
  value("--task", "task", "babi5, babi6, dialer or custom");
  value("--mode", "mode", "train, eval, curve, rl or chat (or use a subcommand)");
  value("--data", "data", "bAbI directory, 'synthetic', or a dialer directory file");
  value("--embeddings", "embeddings", "word vector file");
  value("--ckpt", "ckpt", "checkpoint to read");
  value("--out", "out", "train: checkpoint to write; otherwise output directory");
  value("--simulator", "simulator", "dialer simulator config file");
  value("--test-set", "test_set", "bAbI test file: oov, tst or dev");
  toggle("--mask,!--no-mask", "mask", "action mask on or off");
  toggle("--embed,!--no-embed", "embed", "utterance embeddings on or off");
  toggle("--interleave", "interleave", "add one SL dialog every 100 RL dialogs");
  toggle("--stop-at-train-acc", "stop_at_train_acc", "train until 100% or epoch_cap");
  value("--seed", "seed", "random seed");
  value("--epochs", "epochs", "supervised epochs");
  value("--hidden", "hidden", "LSTM hidden units");
  value("--runs", "runs", "runs per curve point");
  value("--sizes", "sizes", "curve sizes, e.g. 1,10,100,full");
  value("--rl-dialogs", "rl_dialogs", "RL dialogs per run");
  value("--sl-init", "sl_init", "SL dialogs before RL (0 = from scratch)");
  value("--eval-episodes", "eval_episodes", "simulated dialogs per success-rate estimate");
  app.add_option("--set", sets, "extra key=value setting (repeatable)");

  std::optional<Mode> sub_mode;
  for (const auto* name : {"train", "eval", "curve", "rl", "chat"}) {
    auto* sub = app.add_subcommand(name, fmt::format("run the {} mode", name));
    sub->callback([&sub_mode, name] {
      sub_mode = mode_from_name(name);
    });
  }

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << app.version() << "\n";
      return kOk;
    } catch (const CLI::ParseError& e) {
      fmt::print(err, "error: {}\n", e.what());
      return kUsage;
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--set expects key=value, got '{}'", s));
      flags[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (sub_mode) {
      const std::string name(mode_name(*sub_mode));
      if (flags.contains("mode") && flags["mode"] != name)
        throw UsageError(fmt::format("--mode {} conflicts with subcommand {}", flags["mode"], name));
      flags["mode"] = name;
    }

    std::vector<KeyValues> layers;
    if (!config_file.empty())
      layers.push_back(parse_key_values(io::read_file(config_file), config_file));
    layers.push_back(flags);
    auto config = resolve_run_config(layers);
    const bool mode_given =
        flags.contains("mode") || (!config_file.empty() && layers.front().contains("mode"));
    if (!mode_given)
      throw UsageError("no mode given: use a subcommand (train, eval, curve, rl, chat) or --mode");

    // A checkpoint's own run config fills in anything not given here.
    if (!config.ckpt.empty() && fs::exists(run_config_path_for(config.ckpt))) {
      auto saved = parse_key_values(io::read_file(run_config_path_for(config.ckpt)));
      for (const auto* k : {"mode", "ckpt", "out", "runs", "sizes"}) saved.erase(k);
      layers.insert(layers.begin(), std::move(saved));
      config = resolve_run_config(layers);
    }
    config.validate();

    switch (config.mode) {
      case Mode::train: return run_train(config, out);
      case Mode::eval: return run_eval(config, out);
      case Mode::curve: return run_curve(config, out);
      case Mode::rl: return run_rl(config, out);
      case Mode::chat: return run_chat(config, in, out);
    }
    return kUsage;
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  } catch (const TrainingError& e) {
    fmt::print(err, "training failed: {}\n", e.what());
    return kTrainingFailure;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataFailure;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kDataFailure;
  }
}

}  // namespace hcn::cli
