#include "kants/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "kants/error.hpp"

namespace kants {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string where(const std::string& source, std::size_t row) {
  return source + ": row " + std::to_string(row);
}

}  // namespace

void ForecastWindowSpec::validate() const {
  if (context < 1 || prediction < 1) {
    throw ValidationError("context and prediction lengths must be >= 1");
  }
}

void SeriesSet::validate() const {
  if (beams.empty()) throw ValidationError("series set has no beams");
  const std::size_t n = beams.front().values.size();
  for (const Series& s : beams) {
    if (s.values.size() != n) {
      throw ValidationError("beam '" + s.name + "' has " +
                            std::to_string(s.values.size()) +
                            " samples, expected " + std::to_string(n));
    }
    for (double v : s.values) {
      if (!std::isfinite(v)) {
        throw ValidationError("beam '" + s.name + "' contains a non-finite value");
      }
    }
  }
}

std::chrono::sys_seconds parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const int got = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%n", &y,
                              &mo, &d, &sep, &h, &mi, &s, &consumed);
  std::string rest = got == 7 ? text.substr(static_cast<std::size_t>(consumed)) : "";
  if (got != 7 || (sep != 'T' && sep != ' ') ||
      !(rest.empty() || rest == "Z" || rest == "+00:00")) {
    throw ValidationError("invalid ISO-8601 timestamp '" + text + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw ValidationError("invalid ISO-8601 timestamp '" + text + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<seconds> tod{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()),
                static_cast<long>(tod.minutes().count()),
                static_cast<long>(tod.seconds().count()));
  return buf;
}

SeriesSet parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(source + ": empty file");
  }
  const std::vector<std::string> header = split_commas(line);
  if (header.size() < 2 || header.front() != "timestamp") {
    throw ValidationError(source +
                          ": header must be 'timestamp,beam_1,...,beam_B'");
  }
  SeriesSet set;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) {
      throw ValidationError(source + ": empty column name in header");
    }
    set.beams.push_back(Series{header[c], {}, std::nullopt});
  }

  std::size_t row = 1;
  std::optional<std::chrono::sys_seconds> previous;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ValidationError(where(source, row) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    }
    const auto stamp = parse_timestamp(cells[0]);
    if (!previous) {
      set.start = stamp;
    } else if (stamp == *previous) {
      throw ValidationError(where(source, row) + ": duplicate timestamp " + cells[0]);
    } else if (stamp != *previous + std::chrono::hours{1}) {
      throw ValidationError(where(source, row) + ": timestamp " + cells[0] +
                            " breaks the hourly sequence (gap or disorder)");
    }
    previous = stamp;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() ||
          !std::isfinite(v)) {
        throw ValidationError(where(source, row) + ": column '" + header[c] +
                              "' has non-numeric value '" + cell + "'");
      }
      if (v < 0.0) {
        throw ValidationError(where(source, row) + ": column '" + header[c] +
                              "' has negative traffic " + cell);
      }
      set.beams[c - 1].values.push_back(v);
    }
  }
  if (set.length() == 0) throw ValidationError(source + ": no data rows");
  for (const Series& s : set.beams) {
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    if (!(*lo < *hi)) {
      throw ValidationError(source + ": beam '" + s.name +
                            "' has fewer than 2 distinct values; normalization "
                            "is degenerate (min = max)");
    }
  }
  return set;
}

SeriesSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(const SeriesSet& set, std::ostream& out) {
  out << "timestamp";
  for (const Series& s : set.beams) out << ',' << s.name;
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < set.length(); ++t) {
    out << format_timestamp(set.start + std::chrono::hours{static_cast<long>(t)});
    for (const Series& s : set.beams) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s.values[t]);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

void write_csv(const SeriesSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(set, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

NormalizationRecord fit_normalization(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot normalize an empty series");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*lo < *hi)) {
    throw ValidationError("normalization is degenerate: min = max");
  }
  return {*lo, *hi};
}

std::vector<double> normalize(std::span<const double> values,
                              const NormalizationRecord& record) {
  if (!(record.min < record.max)) {
    throw ValidationError("normalization is degenerate: min = max");
  }
  const double range = record.max - record.min;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - record.min) / range;
  }
  return out;
}

std::vector<double> denormalize(std::span<const double> values,
                                const NormalizationRecord& record) {
  if (!(record.min < record.max)) {
    throw ValidationError("normalization is degenerate: min = max");
  }
  const double range = record.max - record.min;
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = values[i] * range + record.min;
  }
  return out;
}

std::vector<NormalizationRecord> fit_normalization(const SeriesSet& set) {
  std::vector<NormalizationRecord> records;
  records.reserve(set.beams.size());
  for (const Series& s : set.beams) {
    try {
      records.push_back(fit_normalization(s.values));
    } catch (const ValidationError& e) {
      throw ValidationError("beam '" + s.name + "': " + e.what());
    }
  }
  return records;
}

SeriesSet normalize(const SeriesSet& set,
                    std::span<const NormalizationRecord> records) {
  if (records.size() != set.beams.size()) {
    throw ValidationError("expected one normalization record per beam");
  }
  SeriesSet out = set;
  for (std::size_t b = 0; b < out.beams.size(); ++b) {
    out.beams[b].values = normalize(set.beams[b].values, records[b]);
    out.beams[b].normalization = records[b];
  }
  return out;
}

WindowedDataset::WindowedDataset(ForecastWindowSpec spec, std::string id)
    : spec_(spec), id_(std::move(id)) {
  spec_.validate();
}

void WindowedDataset::add(std::span<const double> context,
                          std::span<const double> target, std::size_t beam,
                          std::size_t t0) {
  if (context.size() != spec_.context || target.size() != spec_.prediction) {
    throw ValidationError("window does not match the dataset spec");
  }
  const long r = static_cast<long>(size());
  contexts_.conservativeResize(r + 1, static_cast<long>(spec_.context));
  targets_.conservativeResize(r + 1, static_cast<long>(spec_.prediction));
  for (std::size_t i = 0; i < context.size(); ++i) contexts_(r, static_cast<long>(i)) = context[i];
  for (std::size_t i = 0; i < target.size(); ++i) targets_(r, static_cast<long>(i)) = target[i];
  beams_.push_back(beam);
  t0s_.push_back(t0);
}

WindowView WindowedDataset::window(std::size_t i) const {
  if (i >= size()) throw ValidationError("window index out of range");
  const long r = static_cast<long>(i);
  return {std::span<const double>(contexts_.row(r).data(), spec_.context),
          std::span<const double>(targets_.row(r).data(), spec_.prediction),
          beams_[i], t0s_[i]};
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> rows) const {
  WindowedDataset out(spec_, id_);
  out.contexts_.resize(static_cast<long>(rows.size()), static_cast<long>(spec_.context));
  out.targets_.resize(static_cast<long>(rows.size()), static_cast<long>(spec_.prediction));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    if (rows[n] >= size()) throw ValidationError("window index out of range");
    const long src = static_cast<long>(rows[n]);
    out.contexts_.row(static_cast<long>(n)) = contexts_.row(src);
    out.targets_.row(static_cast<long>(n)) = targets_.row(src);
    out.beams_.push_back(beams_[rows[n]]);
    out.t0s_.push_back(t0s_[rows[n]]);
  }
  return out;
}

WindowedDataset make_windows(const SeriesSet& set, const ForecastWindowSpec& spec,
                             std::size_t stride, std::string id) {
  spec.validate();
  if (stride < 1) throw ValidationError("window stride must be >= 1");
  set.validate();
  const std::size_t span = spec.context + spec.prediction;
  for (const Series& s : set.beams) {
    if (s.values.size() < span) {
      throw ValidationError("beam '" + s.name + "' has " +
                            std::to_string(s.values.size()) +
                            " samples, fewer than context + prediction = " +
                            std::to_string(span));
    }
  }
  std::size_t count = 0;
  for (const Series& s : set.beams) count += (s.values.size() - span) / stride + 1;

  WindowedDataset data(spec, std::move(id));
  data.contexts_.resize(static_cast<long>(count), static_cast<long>(spec.context));
  data.targets_.resize(static_cast<long>(count), static_cast<long>(spec.prediction));
  data.beams_.reserve(count);
  data.t0s_.reserve(count);
  long row = 0;
  for (std::size_t b = 0; b < set.beams.size(); ++b) {
    const std::vector<double>& v = set.beams[b].values;
    for (std::size_t start = 0; start + span <= v.size(); start += stride, ++row) {
      for (std::size_t i = 0; i < spec.context; ++i) {
        data.contexts_(row, static_cast<long>(i)) = v[start + i];
      }
      for (std::size_t i = 0; i < spec.prediction; ++i) {
        data.targets_(row, static_cast<long>(i)) = v[start + spec.context + i];
      }
      data.beams_.push_back(b);
      data.t0s_.push_back(start + spec.context);
    }
  }
  return data;
}

std::pair<SeriesSet, SeriesSet> split_train_test(const SeriesSet& set) {
  set.validate();
  if (set.length() < kTrainHours + kTestHours) {
    throw ValidationError("series has " + std::to_string(set.length()) +
                          " hours; the train/test split needs at least " +
                          std::to_string(kTrainHours + kTestHours));
  }
  SeriesSet train = set;
  SeriesSet test = set;
  test.start = set.start + std::chrono::hours{static_cast<long>(kTrainHours)};
  test.offset = set.offset + kTrainHours;
  for (std::size_t b = 0; b < set.beams.size(); ++b) {
    const auto& v = set.beams[b].values;
    train.beams[b].values.assign(v.begin(), v.begin() + kTrainHours);
    test.beams[b].values.assign(v.begin() + kTrainHours,
                                v.begin() + kTrainHours + kTestHours);
  }
  return {std::move(train), std::move(test)};
}

PreparedSplit prepare_split(const SeriesSet& raw) {
  auto [train, test] = split_train_test(raw);
  PreparedSplit out;
  out.records = fit_normalization(train);
  out.train = normalize(train, out.records);
  out.test = normalize(test, out.records);
  return out;
}

SeriesSet generate_synthetic(int beams, int days, std::uint64_t seed) {
  if (beams < 1) throw ValidationError("synthetic generator needs beams >= 1");
  if (days < kMinSyntheticDays) {
    throw ValidationError("synthetic generator needs days >= " +
                          std::to_string(kMinSyntheticDays) +
                          " to cover the train/test split");
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const std::size_t hours = static_cast<std::size_t>(days) * 24;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SeriesSet set;
  set.start = std::chrono::sys_days{std::chrono::year{2024} / 1 / 1};
  for (int b = 0; b < beams; ++b) {
    const double base = uniform(20.0, 60.0);
    const double daily_amp = uniform(0.3, 0.6) * base;
    const double daily_phase = uniform(0.0, kTwoPi);
    const double weekly_amp = uniform(0.05, 0.2) * base;
    const double weekly_phase = uniform(0.0, kTwoPi);
    const double ar_coeff = uniform(0.5, 0.8);
    const double noise_sd = uniform(0.03, 0.08) * base;
    const double burst_rate = uniform(0.005, 0.02);

    Series s;
    s.name = "beam_" + std::to_string(b + 1);
    s.values.resize(hours);
    double ar = 0.0;
    double burst = 0.0;
    for (std::size_t t = 0; t < hours; ++t) {
      const double td = static_cast<double>(t);
      ar = ar_coeff * ar + noise_sd * gauss(rng);
      burst *= 0.6;
      if (unit(rng) < burst_rate) burst += uniform(0.3, 1.0) * base;
      const double v = base + daily_amp * std::sin(kTwoPi * td / 24.0 + daily_phase) +
                       weekly_amp * std::sin(kTwoPi * td / 168.0 + weekly_phase) +
                       ar + burst;
      s.values[t] = std::max(v, 0.01);
    }
    set.beams.push_back(std::move(s));
  }
  return set;
}

void write_windows_csv(const WindowedDataset& data, std::ostream& out) {
  const ForecastWindowSpec& spec = data.spec();
  out << "beam,t0";
  for (std::size_t i = 0; i < spec.context; ++i) out << ",c_" << i;
  for (std::size_t i = 0; i < spec.prediction; ++i) out << ",y_" << i;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t w = 0; w < data.size(); ++w) {
    const WindowView v = data.window(w);
    out << v.beam << ',' << v.t0;
    for (double x : v.context) out << ',' << x;
    for (double x : v.target) out << ',' << x;
    out << '\n';
  }
}

double autocorrelation(std::span<const double> values, std::size_t lag) {
  const std::size_t n = values.size();
  if (lag >= n) throw ValidationError("lag exceeds series length");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = values[t] - mean;
    den += d * d;
    if (t + lag < n) num += d * (values[t + lag] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace kants
