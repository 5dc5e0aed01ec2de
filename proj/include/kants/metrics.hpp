#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "kants/data.hpp"
#include "kants/model.hpp"

namespace kants {

inline constexpr double kMapeEpsilon = 1e-8;

/// Pooled over every (window, horizon step) pair. MAPE is a fraction.
struct MetricsReport {
  std::string model_id;
  std::string test_set_id;
  std::size_t param_count = 0;
  std::size_t n_windows = 0;
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;
};

/// Metrics only; ids and param_count are left for the caller.
MetricsReport compute_metrics(const Matrix& actual, const Matrix& predicted);

struct EvalOptions {
  /// Report in original units using one record per beam.
  bool denormalize = false;
  std::vector<NormalizationRecord> records;
};

MetricsReport evaluate(const Model& model, const WindowedDataset& test,
                       const std::string& model_id, const EvalOptions& opts = {});

/// Sorted by MAE, ties by parameter count. Needs >= 2 reports on one test set.
std::vector<MetricsReport> compare(std::vector<MetricsReport> reports);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

/// Aligned text table: Model | MSE | RMSE | MAE | MAPE | Parameters.
std::string format_table(const std::vector<MetricsReport>& reports);

}  // namespace kants
