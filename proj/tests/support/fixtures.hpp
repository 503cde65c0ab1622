#pragma once

#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace hcn::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  const char* dir = std::getenv("HCN_FIXTURES");
  if (!dir) throw std::runtime_error("HCN_FIXTURES is not set");
  return std::filesystem::path(dir) / name;
}

}  // namespace hcn::testing
