#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hcn::training {

/// One row of the metrics stream. `value` is a turn accuracy for
/// supervised phases and a success rate for RL evaluations.
struct MetricRow {
  std::string phase;
  std::size_t index = 0;  // epoch or dialog count
  double loss = 0.0;
  double value = 0.0;
  double wall_ms = 0.0;
};

using MetricsSink = std::function<void(const MetricRow&)>;

inline constexpr const char* kMetricsHeader = "phase,index,loss,accuracy,wall_ms";

std::string format_metric_row(const MetricRow& row);

/// Collects rows in memory; usable directly as a MetricsSink.
class MetricsLog {
 public:
  void operator()(const MetricRow& row) { rows_.push_back(row); }
  const std::vector<MetricRow>& rows() const { return rows_; }
  /// Header plus one line per row.
  std::string csv() const;

 private:
  std::vector<MetricRow> rows_;
};

}  // namespace hcn::training
