#include "hcn/training/metrics.hpp"

#include <fmt/format.h>

namespace hcn::training {

std::string format_metric_row(const MetricRow& row) {
  return fmt::format("{},{},{:.6g},{:.6g},{:.1f}", row.phase, row.index, row.loss, row.value,
                     row.wall_ms);
}

std::string MetricsLog::csv() const {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows_) out += format_metric_row(r) + "\n";
  return out;
}

}  // namespace hcn::training
