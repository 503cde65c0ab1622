#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace hcn::log {

/// Shared library logger ("hcn"). Writes to stderr unless replaced.
std::shared_ptr<spdlog::logger> logger();

/// Swap the library logger, e.g. to capture warnings in tests.
void set_logger(std::shared_ptr<spdlog::logger> replacement);

}  // namespace hcn::log
