#include "hcn/eval/accuracy.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "hcn/engine/session.hpp"
#include "hcn/util/error.hpp"

namespace hcn::eval {

bool DialogOutcome::correct() const {
  return std::all_of(turns.begin(), turns.end(), [](const auto& t) { return t.correct; });
}

TurnReport summarize(std::vector<DialogOutcome> dialogs) {
  TurnReport r;
  std::size_t correct_turns = 0;
  std::size_t correct_dialogs = 0;
  for (const auto& d : dialogs) {
    r.turns += d.turns.size();
    for (const auto& t : d.turns) correct_turns += t.correct;
    correct_dialogs += d.correct();
  }
  if (r.turns > 0)
    r.turn_accuracy = static_cast<double>(correct_turns) / static_cast<double>(r.turns);
  if (!dialogs.empty())
    r.dialog_accuracy = static_cast<double>(correct_dialogs) / static_cast<double>(dialogs.size());
  r.dialogs = std::move(dialogs);
  return r;
}

TurnReport turn_and_dialog_accuracy(const neural::LstmParameters& params,
                                    const engine::DomainPack& pack,
                                    std::span<const engine::EncodedDialog> dialogs) {
  std::vector<DialogOutcome> out;
  out.reserve(dialogs.size());
  std::mt19937_64 unused;
  for (const auto& d : dialogs) {
    if (d.references.size() != d.size() || d.states.size() != d.size())
      throw DataError("encoded dialog lacks references or entity states");
    const auto dists = neural::forward_dialog(params, d.observations, d.masks, d.labels);
    DialogOutcome outcome;
    for (std::size_t t = 0; t < d.size(); ++t) {
      TurnOutcome turn;
      turn.label = d.labels[t];
      turn.predicted = engine::select_action(dists[t], engine::SelectionMode::greedy, unused);
      try {
        turn.predicted_text = engine::render_action(pack, pack.action(turn.predicted), d.states[t]);
        turn.correct = turn.predicted_text == d.references[t];
      } catch (const DataError&) {
        // A slot the tracker cannot fill never matches a reference.
        turn.predicted_text = pack.action(turn.predicted).surface;
      }
      outcome.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(outcome));
  }
  return summarize(std::move(out));
}

std::vector<std::size_t> first_errors(const TurnReport& report) {
  std::vector<std::size_t> out;
  for (const auto& d : report.dialogs) {
    std::size_t first = kNoError;
    for (std::size_t t = 0; t < d.turns.size(); ++t)
      if (!d.turns[t].correct) {
        first = t;
        break;
      }
    out.push_back(first);
  }
  return out;
}

std::size_t first_error_index(std::span<const ActionId> predicted,
                              std::span<const ActionId> labels) {
  if (predicted.size() != labels.size())
    throw DimensionError("prediction and label sequences differ in length");
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (predicted[t] != labels[t]) return t;
  return kNoError;
}

double DeltaPCounts::delta_p() const {
  if (total() == 0) return 0.0;
  return (static_cast<double>(hcn_wins) - static_cast<double>(rule_wins)) /
         static_cast<double>(total());
}

DeltaPCounts compare_first_errors(std::span<const std::size_t> hcn,
                                  std::span<const std::size_t> rule) {
  if (hcn.size() != rule.size())
    throw UsageError(fmt::format("systems were scored on different dialog sets ({} vs {})",
                                 hcn.size(), rule.size()));
  DeltaPCounts c;
  for (std::size_t i = 0; i < hcn.size(); ++i) {
    if (rule[i] < hcn[i])
      ++c.hcn_wins;
    else if (hcn[i] < rule[i])
      ++c.rule_wins;
    else
      ++c.ties;
  }
  return c;
}

double delta_p(std::span<const std::size_t> hcn, std::span<const std::size_t> rule) {
  return compare_first_errors(hcn, rule).delta_p();
}

std::string report_csv(const std::vector<std::pair<std::string, double>>& metrics) {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : metrics) out += fmt::format("{},{:.6f}\n", name, value);
  return out;
}

}  // namespace hcn::eval
