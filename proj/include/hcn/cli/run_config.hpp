#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::cli {

enum class TaskKind { babi5, babi6, dialer, custom };
enum class Mode { train, eval, curve, rl, chat };

std::string_view task_name(TaskKind task);
std::string_view mode_name(Mode mode);
/// Throws UsageError for unknown names.
TaskKind task_from_name(const std::string& name);
Mode mode_from_name(const std::string& name);

/// Everything a run needs. Serialized next to its outputs so the run can be
/// repeated from that file alone.
struct RunConfig {
  TaskKind task = TaskKind::babi5;
  Mode mode = Mode::train;

  std::string data;        // bAbI directory or "synthetic"; dialer: directory file (optional)
  std::string embeddings;  // word vectors, required when embed is on
  std::string ckpt;        // checkpoint to read (eval, chat, rl warm start)
  std::string out;         // train: checkpoint to write; other modes: output directory
  std::string simulator;   // dialer simulator config file (optional)

  bool mask = true;
  bool embed = false;
  std::string test_set;  // bAbI: "oov" (Task5 default), "tst" or "dev"

  std::uint64_t seed = 1;
  std::size_t hidden = 128;
  std::size_t epochs = 12;
  std::size_t epoch_cap = 200;
  bool stop_at_train_acc = false;
  bool shuffle = false;
  std::size_t unk_min_count = 0;

  std::size_t runs = 5;
  std::string sizes = "default";  // comma list of counts and/or "full"

  std::size_t rl_dialogs = 1000;
  std::size_t sl_init = 0;
  bool interleave = false;
  std::size_t interleave_every = 100;
  std::size_t eval_episodes = 500;

  std::size_t people = 40;          // generated dialer directory size
  std::size_t train_dialogs = 200;  // dialer oracle dialogs for SL
  std::size_t test_dialogs = 200;   // dialer oracle dialogs for evaluation

  /// Checks values and task/toggle combinations; throws UsageError.
  void validate() const;
};

/// Defaults for a task: hidden 32, stop-at-100% and SL init on 10 dialogs
/// for the dialer; UNK folding for Task6.
RunConfig default_run_config(TaskKind task);

using KeyValues = std::map<std::string, std::string>;

/// "key = value" lines; '#' starts a comment. Throws DataError.
KeyValues parse_key_values(std::string_view text, std::string_view source = "config");

/// Applies one setting; throws UsageError for unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Builds a config from layered settings, lowest priority first. The task
/// is resolved before any other key so task defaults sit underneath.
RunConfig resolve_run_config(const std::vector<KeyValues>& layers);

std::string format_run_config(const RunConfig& config);
RunConfig parse_run_config(std::string_view text);

/// Parses the "sizes" setting against a training set of `full` dialogs.
std::vector<std::size_t> parse_sizes(std::string_view text, std::size_t full);

/// Where a checkpoint's run config is kept: "<ckpt>.cfg".
std::filesystem::path run_config_path_for(const std::filesystem::path& checkpoint);

}  // namespace hcn::cli
