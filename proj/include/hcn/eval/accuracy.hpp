#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hcn/engine/domain_pack.hpp"
#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/neural/lstm.hpp"

namespace hcn::eval {

struct TurnOutcome {
  ActionId predicted = 0;
  ActionId label = 0;
  std::string predicted_text;  // rendered in the turn's entity state
  bool correct = false;        // predicted_text equals the reference exactly
};

struct DialogOutcome {
  std::vector<TurnOutcome> turns;
  bool correct() const;
};

struct TurnReport {
  std::vector<DialogOutcome> dialogs;
  std::size_t turns = 0;
  double turn_accuracy = 0.0;
  double dialog_accuracy = 0.0;
};

/// Teacher-forced evaluation: every turn sees the labeled history, and the
/// greedy prediction is rendered and compared with the reference text.
TurnReport turn_and_dialog_accuracy(const neural::LstmParameters& params,
                                    const engine::DomainPack& pack,
                                    std::span<const engine::EncodedDialog> dialogs);

/// Aggregates hand-built outcomes.
TurnReport summarize(std::vector<DialogOutcome> dialogs);

inline constexpr std::size_t kNoError = std::numeric_limits<std::size_t>::max();

/// Index of the first wrong turn per dialog, kNoError when all are right.
std::vector<std::size_t> first_errors(const TurnReport& report);

/// First position where `predicted` differs from `labels`, or kNoError.
std::size_t first_error_index(std::span<const ActionId> predicted,
                              std::span<const ActionId> labels);

struct DeltaPCounts {
  std::size_t hcn_wins = 0;
  std::size_t rule_wins = 0;
  std::size_t ties = 0;
  std::size_t total() const { return hcn_wins + rule_wins + ties; }
  double delta_p() const;
};

/// A system wins a dialog when its first error comes later than the
/// other's. Throws UsageError when the lists differ in length.
DeltaPCounts compare_first_errors(std::span<const std::size_t> hcn,
                                  std::span<const std::size_t> rule);

/// (HCN wins - rule wins) / dialogs; 0 for an empty set.
double delta_p(std::span<const std::size_t> hcn, std::span<const std::size_t> rule);

/// "metric,value" lines with a header.
std::string report_csv(const std::vector<std::pair<std::string, double>>& metrics);

}  // namespace hcn::eval
