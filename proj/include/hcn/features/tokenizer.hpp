#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hcn::features {

/// Lowercases, drops the characters . , ! ? ; : and splits on whitespace.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace hcn::features
