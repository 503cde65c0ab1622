#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hcn/neural/optimizer.hpp"

namespace hcn::neural {

/// Binary layout: "HCN1", obs_size, action_count, hidden (u64 LE), then every
/// tensor in declaration order as row-major f64 LE, then a flag byte. Flag 1
/// is followed by rho, epsilon and both AdaDelta accumulators.
struct Checkpoint {
  LstmParameters params;
  std::optional<AdaDeltaState> optimizer;
};

std::string serialize_checkpoint(const LstmParameters& params,
                                 const AdaDeltaState* optimizer = nullptr);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const LstmParameters& params,
                     const AdaDeltaState* optimizer = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hcn::neural
