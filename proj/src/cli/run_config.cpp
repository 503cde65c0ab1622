#include "hcn/cli/run_config.hpp"

#include <charconv>

#include <fmt/format.h>

#include "hcn/eval/curve.hpp"
#include "hcn/util/error.hpp"

namespace hcn::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::uint64_t to_count(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw UsageError(fmt::format("{} expects a non-negative integer, got '{}'", key, value));
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError(fmt::format("{} expects true or false, got '{}'", key, value));
}

}  // namespace

TaskKind task_from_name(const std::string& value) {
  if (value == "babi5") return TaskKind::babi5;
  if (value == "babi6") return TaskKind::babi6;
  if (value == "dialer") return TaskKind::dialer;
  if (value == "custom") return TaskKind::custom;
  throw UsageError(fmt::format("unknown task '{}' (babi5, babi6, dialer, custom)", value));
}

Mode mode_from_name(const std::string& value) {
  if (value == "train") return Mode::train;
  if (value == "eval") return Mode::eval;
  if (value == "curve") return Mode::curve;
  if (value == "rl") return Mode::rl;
  if (value == "chat") return Mode::chat;
  throw UsageError(fmt::format("unknown mode '{}' (train, eval, curve, rl, chat)", value));
}

std::string_view task_name(TaskKind task) {
  switch (task) {
    case TaskKind::babi5: return "babi5";
    case TaskKind::babi6: return "babi6";
    case TaskKind::dialer: return "dialer";
    case TaskKind::custom: return "custom";
  }
  return "";
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::train: return "train";
    case Mode::eval: return "eval";
    case Mode::curve: return "curve";
    case Mode::rl: return "rl";
    case Mode::chat: return "chat";
  }
  return "";
}

RunConfig default_run_config(TaskKind task) {
  RunConfig c;
  c.task = task;
  switch (task) {
    case TaskKind::babi5:
      c.test_set = "oov";
      break;
    case TaskKind::babi6:
      c.test_set = "tst";
      c.unk_min_count = 3;
      break;
    case TaskKind::dialer:
      c.hidden = 32;
      c.stop_at_train_acc = true;
      c.sl_init = 10;
      break;
    case TaskKind::custom:
      break;
  }
  return c;
}

void RunConfig::validate() const {
  if (task == TaskKind::custom)
    throw UsageError(
        "custom domains are built in code against the DomainPack interface; "
        "the command line runs babi5, babi6 and dialer");
  if (task == TaskKind::dialer && embed)
    throw UsageError("the dialer has no text input; embeddings cannot be enabled");
  if (embed && embeddings.empty()) throw UsageError("--embed needs --embeddings FILE");
  if (task != TaskKind::dialer && data.empty())
    throw UsageError("bAbI tasks need --data DIR (or --data synthetic for Task5)");
  if (task == TaskKind::babi6 && data == "synthetic")
    throw UsageError("the synthetic corpus only covers Task5");
  if (task != TaskKind::dialer && test_set != "oov" && test_set != "tst" && test_set != "dev")
    throw UsageError(fmt::format("test_set must be oov, tst or dev, got '{}'", test_set));
  if (task == TaskKind::babi6 && test_set == "oov") throw UsageError("Task6 has no OOV test set");
  if ((mode == Mode::eval || mode == Mode::chat) && ckpt.empty())
    throw UsageError(fmt::format("{} needs --ckpt", mode_name(mode)));
  if (mode == Mode::rl && task != TaskKind::dialer)
    throw UsageError("rl needs a user simulator; only the dialer task has one");
  if (hidden == 0 || epochs == 0 || epoch_cap == 0 || runs == 0)
    throw UsageError("hidden, epochs, epoch_cap and runs must be positive");
  if (interleave_every == 0) throw UsageError("interleave_every must be positive");
  if (task == TaskKind::dialer && (train_dialogs == 0 || test_dialogs == 0 || people < 2))
    throw UsageError("dialer needs train_dialogs, test_dialogs >= 1 and people >= 2");
}

KeyValues parse_key_values(std::string_view text, std::string_view source) {
  KeyValues out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DataError(fmt::format("{} line {}: expected key = value", source, line_no));
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw DataError(fmt::format("{} line {}: empty key", source, line_no));
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "task") c.task = task_from_name(v);
  else if (key == "mode") c.mode = mode_from_name(v);
  else if (key == "data") c.data = v;
  else if (key == "embeddings") c.embeddings = v;
  else if (key == "ckpt") c.ckpt = v;
  else if (key == "out") c.out = v;
  else if (key == "simulator") c.simulator = v;
  else if (key == "mask") c.mask = to_bool(key, v);
  else if (key == "embed") c.embed = to_bool(key, v);
  else if (key == "test_set") c.test_set = v;
  else if (key == "seed") c.seed = to_count(key, v);
  else if (key == "hidden") c.hidden = to_count(key, v);
  else if (key == "epochs") c.epochs = to_count(key, v);
  else if (key == "epoch_cap") c.epoch_cap = to_count(key, v);
  else if (key == "stop_at_train_acc") c.stop_at_train_acc = to_bool(key, v);
  else if (key == "shuffle") c.shuffle = to_bool(key, v);
  else if (key == "unk_min_count") c.unk_min_count = to_count(key, v);
  else if (key == "runs") c.runs = to_count(key, v);
  else if (key == "sizes") c.sizes = v;
  else if (key == "rl_dialogs") c.rl_dialogs = to_count(key, v);
  else if (key == "sl_init") c.sl_init = to_count(key, v);
  else if (key == "interleave") c.interleave = to_bool(key, v);
  else if (key == "interleave_every") c.interleave_every = to_count(key, v);
  else if (key == "eval_episodes") c.eval_episodes = to_count(key, v);
  else if (key == "people") c.people = to_count(key, v);
  else if (key == "train_dialogs") c.train_dialogs = to_count(key, v);
  else if (key == "test_dialogs") c.test_dialogs = to_count(key, v);
  else throw UsageError(fmt::format("unknown setting '{}'", key));
}

RunConfig resolve_run_config(const std::vector<KeyValues>& layers) {
  TaskKind task = TaskKind::babi5;
  for (const auto& layer : layers)
    if (const auto it = layer.find("task"); it != layer.end()) task = task_from_name(it->second);
  RunConfig c = default_run_config(task);
  for (const auto& layer : layers)
    for (const auto& [k, v] : layer)
      if (k != "task") apply_setting(c, k, v);
  return c;
}

std::string format_run_config(const RunConfig& c) {
  auto b = [](bool x) { return x ? "true" : "false"; };
  std::string s;
  s += fmt::format("task = {}\nmode = {}\n", task_name(c.task), mode_name(c.mode));
  s += fmt::format("data = {}\nembeddings = {}\nckpt = {}\nout = {}\nsimulator = {}\n", c.data,
                   c.embeddings, c.ckpt, c.out, c.simulator);
  s += fmt::format("mask = {}\nembed = {}\ntest_set = {}\n", b(c.mask), b(c.embed), c.test_set);
  s += fmt::format("seed = {}\nhidden = {}\nepochs = {}\nepoch_cap = {}\n", c.seed, c.hidden,
                   c.epochs, c.epoch_cap);
  s += fmt::format("stop_at_train_acc = {}\nshuffle = {}\nunk_min_count = {}\n",
                   b(c.stop_at_train_acc), b(c.shuffle), c.unk_min_count);
  s += fmt::format("runs = {}\nsizes = {}\n", c.runs, c.sizes);
  s += fmt::format("rl_dialogs = {}\nsl_init = {}\ninterleave = {}\ninterleave_every = {}\n",
                   c.rl_dialogs, c.sl_init, b(c.interleave), c.interleave_every);
  s += fmt::format("eval_episodes = {}\npeople = {}\ntrain_dialogs = {}\ntest_dialogs = {}\n",
                   c.eval_episodes, c.people, c.train_dialogs, c.test_dialogs);
  return s;
}

RunConfig parse_run_config(std::string_view text) {
  return resolve_run_config({parse_key_values(text, "run config")});
}

std::vector<std::size_t> parse_sizes(std::string_view text, std::size_t full) {
  if (text == "default") return eval::default_curve_sizes(full);
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string item(trim(text.substr(pos, end - pos)));
    pos = end + 1;
    if (item.empty()) continue;
    out.push_back(item == "full" ? full : to_count("sizes", item));
  }
  if (out.empty()) throw UsageError("sizes is empty");
  return out;
}

std::filesystem::path run_config_path_for(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".cfg";
  return p;
}

}  // namespace hcn::cli
