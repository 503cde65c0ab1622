#pragma once

#include <cstdint>
#include <vector>

#include "hcn/babi/dialog_io.hpp"
#include "hcn/babi/knowledge.hpp"

namespace hcn::babi {

/// Restaurant-booking dialogs in the Task5 style, generated from a fixed
/// grammar. Used where the distributed files are not available.
struct SyntheticCorpus {
  std::vector<BabiDialog> dialogs;
  KnowledgeBase kb;
};

/// The knowledge base is a pure function of `oov`: the OOV variant uses
/// cuisines, locations and restaurant names disjoint from the regular one.
KnowledgeBase synthetic_task5_kb(bool oov = false);

SyntheticCorpus generate_synthetic_task5(std::size_t count, std::uint64_t seed, bool oov = false);

}  // namespace hcn::babi
