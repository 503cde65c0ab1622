#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hcn/engine/domain_pack.hpp"

namespace hcn::engine {

/// A labeled dialog replayed through a domain pack: everything the network
/// and the evaluators need, turn by turn.
struct EncodedDialog {
  std::vector<Eigen::VectorXd> observations;
  std::vector<ActionMask> masks;
  std::vector<ActionId> labels;
  std::vector<std::string> references;  // reference system text per turn
  std::vector<EntityState> states;      // entity state when the action was chosen

  std::size_t size() const { return labels.size(); }
};

}  // namespace hcn::engine
