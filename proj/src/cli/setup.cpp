#include "hcn/cli/setup.hpp"

#include <fmt/format.h>

#include "hcn/babi/pack.hpp"
#include "hcn/babi/synthetic.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::cli {

namespace fs = std::filesystem;

namespace {

// Fixed corpus seeds: the data stays the same when the model seed changes.
constexpr std::uint64_t kSyntheticTrainSeed = 1001;
constexpr std::uint64_t kSyntheticTestSeed = 1002;
constexpr std::size_t kSyntheticDialogs = 1000;
constexpr std::uint64_t kDirectorySeed = 7;

fs::path find_in(const fs::path& dir, const std::string& name) {
  for (const auto& p : {dir / name, dir / "dialog-bAbI-tasks" / name})
    if (fs::exists(p)) return p;
  throw DataError(fmt::format("{} not found in {}", name, dir.string()));
}

std::vector<engine::EncodedDialog> encode_all(const babi::BabiPack& pack,
                                              const std::vector<babi::BabiDialog>& dialogs,
                                              const features::Featurizer& featurizer) {
  std::vector<engine::EncodedDialog> out;
  out.reserve(dialogs.size());
  for (const auto& d : dialogs) out.push_back(pack.encode(d, featurizer));
  return out;
}

void prepare_babi(Experiment& e, bool encode) {
  const auto& c = e.config;
  const auto task = c.task == TaskKind::babi5 ? babi::Task::task5 : babi::Task::task6;
  babi::KnowledgeBase kb;
  if (c.data == "synthetic") {
    auto train = babi::generate_synthetic_task5(kSyntheticDialogs, kSyntheticTrainSeed);
    auto test = babi::generate_synthetic_task5(kSyntheticDialogs, kSyntheticTestSeed,
                                               c.test_set == "oov");
    e.train_dialogs = std::move(train.dialogs);
    e.test_dialogs = std::move(test.dialogs);
    kb = std::move(train.kb);
  } else {
    const auto files = locate_babi_files(c.data, c.task, c.test_set);
    e.train_dialogs = babi::load_babi_dialogs(files.train);
    e.test_dialogs = babi::load_babi_dialogs(files.test);
    if (files.kb) kb = babi::load_knowledge_base(*files.kb);
  }
  babi::BabiOptions options{task, c.mask, false, c.unk_min_count};
  auto pack = std::make_shared<const babi::BabiPack>(
      babi::BabiPack::build(e.train_dialogs, std::move(kb), options));
  auto eval_pack = std::make_shared<const babi::BabiPack>(
      pack->with_knowledge(e.test_dialogs).with_options(c.mask, true));

  const auto utterances = babi::user_utterances(e.train_dialogs);
  std::shared_ptr<const features::EmbeddingTable> table;
  if (c.embed)
    table = std::make_shared<const features::EmbeddingTable>(
        features::load_embeddings(c.embeddings));
  e.featurizer = std::make_shared<const features::Featurizer>(
      features::build_vocab(utterances), table, pack->context_size(), pack->api_feature_size());
  if (encode) {
    e.train = encode_all(*pack, e.train_dialogs, *e.featurizer);
    e.test = encode_all(*eval_pack, e.test_dialogs, *e.featurizer);
  }
  e.train_pack = pack;
  e.eval_pack = eval_pack;
  log::logger()->info("{}: {} training and {} test dialogs, {} templates", task_name(c.task),
                      e.train_dialogs.size(), e.test_dialogs.size(), pack->action_count());
}

void prepare_dialer(Experiment& e, bool encode) {
  const auto& c = e.config;
  e.directory = std::make_shared<const dialer::Directory>(
      c.data.empty() ? dialer::generate_directory(kDirectorySeed, c.people)
                     : dialer::load_directory(c.data));
  if (!c.simulator.empty()) e.simulator = dialer::load_simulator_config(c.simulator);
  auto pack = std::make_shared<const dialer::DialerPack>(e.directory, c.mask);
  e.train_pack = pack;
  e.eval_pack = pack;
  e.featurizer = std::make_shared<const features::Featurizer>(std::nullopt, nullptr,
                                                              pack->context_size(), 0);
  if (encode) {
    e.train = dialer_oracle_dialogs(e, c.train_dialogs, c.seed * 1000 + 1);
    e.test = dialer_oracle_dialogs(e, c.test_dialogs, c.seed * 1000 + 2);
  }
}

}  // namespace

BabiFiles locate_babi_files(const fs::path& dir, TaskKind task, const std::string& test_set) {
  BabiFiles f;
  std::string kb_name;
  if (task == TaskKind::babi5) {
    const std::string stem = "dialog-babi-task5-full-dialogs-";
    f.train = find_in(dir, stem + "trn.txt");
    f.test = find_in(dir, stem + (test_set == "oov" ? "tst-OOV.txt" : test_set + ".txt"));
    kb_name = "dialog-babi-kb-all.txt";
  } else {
    const std::string stem = "dialog-babi-task6-dstc2-";
    f.train = find_in(dir, stem + "trn.txt");
    f.test = find_in(dir, stem + test_set + ".txt");
    kb_name = "dialog-babi-task6-dstc2-kb.txt";
  }
  try {
    f.kb = find_in(dir, kb_name);
  } catch (const DataError&) {
    log::logger()->warn("no {} in {}; using database rows from the dialogs only", kb_name,
                        dir.string());
  }
  return f;
}

Experiment prepare_experiment(const RunConfig& config, bool encode) {
  config.validate();
  Experiment e;
  e.config = config;
  if (config.task == TaskKind::dialer)
    prepare_dialer(e, encode);
  else
    prepare_babi(e, encode);
  return e;
}

std::vector<engine::EncodedDialog> dialer_oracle_dialogs(const Experiment& e, std::size_t count,
                                                         std::uint64_t seed) {
  const auto& pack = dynamic_cast<const dialer::DialerPack&>(*e.train_pack);
  return dialer::collect_oracle_dialogs(pack, e.simulator, count, seed);
}

}  // namespace hcn::cli
