#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "hcn/babi/dialog_io.hpp"
#include "hcn/cli/run_config.hpp"
#include "hcn/dialer/simulator.hpp"
#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/features/observation.hpp"

namespace hcn::cli {

/// Distributed bAbI file names, looked up in the data directory or in a
/// "dialog-bAbI-tasks" subdirectory.
struct BabiFiles {
  std::filesystem::path train;
  std::filesystem::path test;
  std::optional<std::filesystem::path> kb;
};
BabiFiles locate_babi_files(const std::filesystem::path& dir, TaskKind task,
                            const std::string& test_set);

/// A task wired up for training and evaluation.
struct Experiment {
  RunConfig config;
  std::shared_ptr<const engine::DomainPack> train_pack;
  std::shared_ptr<const engine::DomainPack> eval_pack;  // test knowledge, test-time masking
  std::shared_ptr<const features::Featurizer> featurizer;
  std::vector<engine::EncodedDialog> train;
  std::vector<engine::EncodedDialog> test;

  std::vector<babi::BabiDialog> train_dialogs;  // bAbI only
  std::vector<babi::BabiDialog> test_dialogs;

  std::shared_ptr<const dialer::Directory> directory;  // dialer only
  dialer::SimulatorConfig simulator;

  std::size_t obs_size() const { return featurizer->obs_size(); }
  std::size_t action_count() const { return train_pack->action_count(); }
};

/// Loads data and builds packs and encodings. With `encode` false the
/// dialogs are left unencoded (chat needs only the packs).
Experiment prepare_experiment(const RunConfig& config, bool encode = true);

/// Seeded oracle dialogs for the dialer.
std::vector<engine::EncodedDialog> dialer_oracle_dialogs(const Experiment& experiment,
                                                         std::size_t count, std::uint64_t seed);

}  // namespace hcn::cli
