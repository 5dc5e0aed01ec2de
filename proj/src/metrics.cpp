#include "kants/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kants/error.hpp"

namespace kants {

MetricsReport compute_metrics(const Matrix& actual, const Matrix& predicted) {
  if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
    throw ValidationError("metrics: actual and predicted shapes differ");
  }
  if (actual.size() == 0) throw ValidationError("metrics: empty test set");
  double se = 0.0;
  double ae = 0.0;
  double ape = 0.0;
  for (long r = 0; r < actual.rows(); ++r) {
    for (long c = 0; c < actual.cols(); ++c) {
      const double y = actual(r, c);
      const double e = y - predicted(r, c);
      se += e * e;
      ae += std::abs(e);
      ape += std::abs(e) / std::max(std::abs(y), kMapeEpsilon);
    }
  }
  const double n = static_cast<double>(actual.size());
  MetricsReport out;
  out.n_windows = static_cast<std::size_t>(actual.rows());
  out.mse = se / n;
  out.rmse = std::sqrt(out.mse);
  out.mae = ae / n;
  out.mape = ape / n;
  return out;
}

MetricsReport evaluate(const Model& model, const WindowedDataset& test,
                       const std::string& model_id, const EvalOptions& opts) {
  if (test.empty()) throw ValidationError("cannot evaluate on an empty test set");
  const std::size_t in_w = std::visit([](const auto& m) { return m.input_width(); }, model);
  const std::size_t out_w = std::visit([](const auto& m) { return m.output_width(); }, model);
  if (in_w != test.spec().context || out_w != test.spec().prediction) {
    throw ValidationError("model widths do not match the test windows");
  }
  Matrix predicted = predict(model, test.contexts());
  Matrix actual = test.targets();
  if (opts.denormalize) {
    for (std::size_t w = 0; w < test.size(); ++w) {
      const std::size_t beam = test.window(w).beam;
      if (beam >= opts.records.size()) {
        throw ValidationError("no normalization record for beam " + std::to_string(beam));
      }
      const NormalizationRecord& rec = opts.records[beam];
      const double range = rec.max - rec.min;
      const long r = static_cast<long>(w);
      actual.row(r) = (actual.row(r).array() * range + rec.min).matrix();
      predicted.row(r) = (predicted.row(r).array() * range + rec.min).matrix();
    }
  }
  MetricsReport report = compute_metrics(actual, predicted);
  report.model_id = model_id;
  report.test_set_id = test.id();
  report.param_count = param_count(model);
  return report;
}

std::vector<MetricsReport> compare(std::vector<MetricsReport> reports) {
  if (reports.size() < 2) {
    throw ValidationError("comparison needs at least two reports");
  }
  for (const MetricsReport& r : reports) {
    if (r.test_set_id != reports.front().test_set_id) {
      throw ValidationError("reports were computed on different test sets ('" +
                            reports.front().test_set_id + "' vs '" +
                            r.test_set_id + "')");
    }
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const MetricsReport& a, const MetricsReport& b) {
                     if (a.mae != b.mae) return a.mae < b.mae;
                     return a.param_count < b.param_count;
                   });
  return reports;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"model", r.model_id},     {"test_set", r.test_set_id},
          {"parameters", r.param_count}, {"windows", r.n_windows},
          {"mse", r.mse},            {"rmse", r.rmse},
          {"mae", r.mae},            {"mape", r.mape}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.model_id = j.at("model").get<std::string>();
  r.test_set_id = j.at("test_set").get<std::string>();
  r.param_count = j.at("parameters").get<std::size_t>();
  r.n_windows = j.at("windows").get<std::size_t>();
  r.mse = j.at("mse").get<double>();
  r.rmse = j.at("rmse").get<double>();
  r.mae = j.at("mae").get<double>();
  r.mape = j.at("mape").get<double>();
  return r;
}

std::string format_table(const std::vector<MetricsReport>& reports) {
  std::size_t name_w = 5;
  for (const auto& r : reports) name_w = std::max(name_w, r.model_id.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %12s  %12s  %12s  %10s  %10s\n",
                static_cast<int>(name_w), "Model", "MSE(1e-3)", "RMSE(1e-2)",
                "MAE(1e-2)", "MAPE", "Parameters");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-*s  %12.4f  %12.4f  %12.4f  %10.4f  %10zu\n",
                  static_cast<int>(name_w), r.model_id.c_str(), r.mse * 1e3,
                  r.rmse * 1e2, r.mae * 1e2, r.mape, r.param_count);
    out << buf;
  }
  return out.str();
}

}  // namespace kants
