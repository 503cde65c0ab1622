#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hcn {

/// Bit vector over action ids; bit i set means action i is permitted.
class ActionMask {
 public:
  ActionMask() = default;
  explicit ActionMask(std::size_t size, bool value = false) : bits_(size, value) {}

  static ActionMask all(std::size_t size) { return ActionMask(size, true); }

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_.at(i); }
  void set(std::size_t i, bool value = true) { bits_.at(i) = value; }

  std::size_t count() const;
  bool none() const { return count() == 0; }

  /// "1011"-style rendering, lowest id first.
  std::string to_string() const;

  friend bool operator==(const ActionMask&, const ActionMask&) = default;

 private:
  std::vector<bool> bits_;
};

}  // namespace hcn
