#include "hcn/neural/action_mask.hpp"

#include <algorithm>

namespace hcn {

std::size_t ActionMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::string ActionMask::to_string() const {
  std::string out;
  out.reserve(bits_.size());
  for (bool b : bits_) out.push_back(b ? '1' : '0');
  return out;
}

}  // namespace hcn
