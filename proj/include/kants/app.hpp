#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kants/checkpoint.hpp"
#include "kants/data.hpp"
#include "kants/metrics.hpp"
#include "kants/training.hpp"

namespace kants {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kOutputRootEnv = "KANTS_OUTPUT_ROOT";

/// Where a run gets its raw series: a CSV file or the synthetic generator.
struct DataSource {
  std::optional<std::filesystem::path> csv;
  int synthetic_beams = 6;
  int synthetic_days = 30;
  std::uint64_t synthetic_seed = 7;

  SeriesSet load() const;
  nlohmann::json to_json() const;
};

struct ModelSpec {
  std::string family = "kan";
  std::vector<std::size_t> shape;
  SplineSpec spline;

  void validate() const;
  std::size_t param_count() const;
  nlohmann::json to_json() const;
};

/// Named model configurations: mlp-3depth, mlp-4depth, kan-3depth, kan-4depth.
std::optional<ModelSpec> find_preset(const std::string& name);
std::vector<std::string> preset_names();

Model build_model(const ModelSpec& spec, std::uint64_t seed);

struct RunConfig {
  std::string preset;
  ModelSpec model;
  TrainConfig train;
  ForecastWindowSpec window;
  DataSource data;
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  /// Also record test MAE after every epoch.
  bool track_test = true;

  void validate() const;
  nlohmann::json to_json() const;
};

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);

/// Default output directory for a command: $KANTS_OUTPUT_ROOT/<name> or runs/<name>.
std::filesystem::path default_output_dir(const std::string& command);

void write_loss_curve_csv(const LossCurve& curve, std::ostream& out);

void cmd_generate(int beams, int days, std::uint64_t seed,
                  const std::filesystem::path& out);

struct TrainOutcome {
  Checkpoint checkpoint;
  LossCurve curve;
  nlohmann::json manifest;
};

/// Writes checkpoint.json, loss_curve.csv and manifest.json under cfg.out_dir.
TrainOutcome cmd_train(const RunConfig& cfg, std::ostream* log = nullptr,
                       int log_every = 50);

struct EvalRequest {
  std::vector<std::filesystem::path> checkpoints;
  DataSource data;
  std::string split = "test";
  bool denormalize = false;
  std::optional<std::filesystem::path> out_dir;
};

/// Returns one report per checkpoint; ranks them when there are several.
/// Writes metrics.json and metrics.txt when out_dir is set.
std::vector<MetricsReport> cmd_eval(const EvalRequest& req);

struct ForecastRequest {
  std::filesystem::path checkpoint;
  DataSource data;
  std::size_t beam = 0;
  /// Absolute hour index of the first forecast step; defaults to the first
  /// complete window of the test split.
  std::optional<std::size_t> t0;
  std::filesystem::path out;
};

/// Plot-ready CSV: beam,t,timestamp,segment,actual,predicted with c + T rows.
void cmd_forecast(const ForecastRequest& req);

struct AblationGrid {
  std::vector<std::size_t> nodes{5, 10, 20};
  std::vector<int> grids{5, 10, 20};
  int degree = 3;
  void validate() const;
};

struct AblationRun {
  std::size_t nodes;
  int grid;
  std::size_t param_count;
  bool ok;
  std::string message;
  LossCurve curve;
  double final_loss() const;
};

struct AblationRequest {
  AblationGrid grid;
  DataSource data;
  TrainConfig train;
  ForecastWindowSpec window;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
};

/// Trains every [context, n, prediction] KAN of the grid. Writes
/// ablation.csv (n,G,epoch,train_loss), ablation_runs.csv and one
/// directory per run. A diverging run is recorded and the sweep continues.
std::vector<AblationRun> cmd_ablate(const AblationRequest& req,
                                    std::ostream* log = nullptr);

}  // namespace kants
