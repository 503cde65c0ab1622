#include "hcn/util/log.hpp"

#include <mutex>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace hcn::log {
namespace {

std::mutex g_mutex;
std::shared_ptr<spdlog::logger> g_logger;

}  // namespace

std::shared_ptr<spdlog::logger> logger() {
  std::lock_guard lock(g_mutex);
  if (!g_logger) {
    g_logger = std::make_shared<spdlog::logger>(
        "hcn", std::make_shared<spdlog::sinks::stderr_color_sink_mt>());
    g_logger->set_pattern("[%l] %v");
  }
  return g_logger;
}

void set_logger(std::shared_ptr<spdlog::logger> replacement) {
  std::lock_guard lock(g_mutex);
  g_logger = std::move(replacement);
}

}  // namespace hcn::log
