#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kants/linalg.hpp"

namespace kants {

/// Affine map x' = (x - min) / (max - min).
struct NormalizationRecord {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const NormalizationRecord&, const NormalizationRecord&) = default;
};

struct Series {
  std::string name;
  std::vector<double> values;
  /// Set once the values have been normalized.
  std::optional<NormalizationRecord> normalization;
};

/// Hourly series, one per beam, all of the same length.
struct SeriesSet {
  std::chrono::sys_seconds start{};
  /// Hour index of values[0] relative to the original series start.
  std::size_t offset = 0;
  std::vector<Series> beams;

  std::size_t length() const { return beams.empty() ? 0 : beams.front().values.size(); }
  /// Throws ValidationError on ragged or non-finite data.
  void validate() const;
};

inline constexpr std::size_t kTrainHours = 15 * 24;  // two weeks + 1 day
inline constexpr std::size_t kTestHours = 8 * 24;        // one week + 1 day
inline constexpr int kMinSyntheticDays = 23;

struct ForecastWindowSpec {
  std::size_t context = 168;
  std::size_t prediction = 24;
  void validate() const;
  friend bool operator==(const ForecastWindowSpec&, const ForecastWindowSpec&) = default;
};

/// Borrowed view of one (context, target) pair.
struct WindowView {
  std::span<const double> context;
  std::span<const double> target;
  std::size_t beam;
  /// Index of the first target sample within the beam's series.
  std::size_t t0;
};

/// Context/target pairs pooled over beams, stored as row-major matrices.
class WindowedDataset {
 public:
  WindowedDataset() = default;
  WindowedDataset(ForecastWindowSpec spec, std::string id);

  void add(std::span<const double> context, std::span<const double> target,
           std::size_t beam, std::size_t t0);

  const ForecastWindowSpec& spec() const { return spec_; }
  const std::string& id() const { return id_; }
  std::size_t size() const { return beams_.size(); }
  bool empty() const { return beams_.empty(); }
  const Matrix& contexts() const { return contexts_; }
  const Matrix& targets() const { return targets_; }
  WindowView window(std::size_t i) const;
  /// Copies of the listed rows, in order.
  WindowedDataset subset(std::span<const std::size_t> rows) const;

 private:
  friend WindowedDataset make_windows(const SeriesSet&,
                                      const ForecastWindowSpec&, std::size_t,
                                      std::string);

  ForecastWindowSpec spec_;
  std::string id_;
  Matrix contexts_;
  Matrix targets_;
  std::vector<std::size_t> beams_;
  std::vector<std::size_t> t0s_;
};

SeriesSet load_csv(const std::filesystem::path& path);
SeriesSet parse_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(const SeriesSet& set, std::ostream& out);
void write_csv(const SeriesSet& set, const std::filesystem::path& path);

std::string format_timestamp(std::chrono::sys_seconds t);
std::chrono::sys_seconds parse_timestamp(const std::string& text);

NormalizationRecord fit_normalization(std::span<const double> values);
std::vector<double> normalize(std::span<const double> values,
                              const NormalizationRecord& record);
std::vector<double> denormalize(std::span<const double> values,
                                const NormalizationRecord& record);

/// Per-beam min/max of a raw set.
std::vector<NormalizationRecord> fit_normalization(const SeriesSet& set);
/// Applies one record per beam; the result carries the records.
SeriesSet normalize(const SeriesSet& set,
                    std::span<const NormalizationRecord> records);

WindowedDataset make_windows(const SeriesSet& set, const ForecastWindowSpec& spec,
                             std::size_t stride = 1, std::string id = {});

/// First kTrainHours -> train, next kTestHours -> test; the rest is unused.
std::pair<SeriesSet, SeriesSet> split_train_test(const SeriesSet& set);

/// Train/test split normalized with records fitted on the train part only.
struct PreparedSplit {
  SeriesSet train;
  SeriesSet test;
  std::vector<NormalizationRecord> records;
};
PreparedSplit prepare_split(const SeriesSet& raw);

/// Satellite-like hourly traffic: base level, daily and weekly cycles,
/// AR(1) noise and decaying bursts, clipped positive.
SeriesSet generate_synthetic(int beams, int days, std::uint64_t seed);

/// Debug export: beam,t0,c_0..c_{c-1},y_0..y_{T-1}.
void write_windows_csv(const WindowedDataset& data, std::ostream& out);

/// Lag-`lag` sample autocorrelation.
double autocorrelation(std::span<const double> values, std::size_t lag);

}  // namespace kants
