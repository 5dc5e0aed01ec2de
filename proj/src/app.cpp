#include "kants/app.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "kants/error.hpp"

namespace kants {

namespace fs = std::filesystem;

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

WindowedDataset windows_for_split(const Checkpoint& ckpt, const DataSource& data,
                                  const std::string& split,
                                  std::vector<NormalizationRecord>& records) {
  if (split != "train" && split != "test") {
    throw ValidationError("split must be 'train' or 'test'");
  }
  const SeriesSet raw = data.load();
  auto [train, test] = split_train_test(raw);
  records = ckpt.normalization.empty() ? fit_normalization(train) : ckpt.normalization;
  if (records.size() != raw.beams.size()) {
    throw ValidationError("checkpoint carries " + std::to_string(records.size()) +
                          " normalization records but the data has " +
                          std::to_string(raw.beams.size()) + " beams");
  }
  const SeriesSet& chosen = split == "train" ? train : test;
  const SeriesSet norm = normalize(chosen, records);
  const std::size_t span = ckpt.window.context + ckpt.window.prediction;
  if (norm.length() < span) {
    // No complete window fits: an empty split.
    return WindowedDataset(ckpt.window, split);
  }
  return make_windows(norm, ckpt.window, 1, split);
}

}  // namespace

SeriesSet DataSource::load() const {
  if (csv) return load_csv(*csv);
  return generate_synthetic(synthetic_beams, synthetic_days, synthetic_seed);
}

nlohmann::json DataSource::to_json() const {
  if (csv) return {{"csv", csv->string()}};
  return {{"synthetic",
           {{"beams", synthetic_beams}, {"days", synthetic_days}, {"seed", synthetic_seed}}}};
}

void ModelSpec::validate() const {
  if (family != "kan" && family != "mlp") {
    throw ValidationError("model family must be 'kan' or 'mlp', got '" + family + "'");
  }
  if (shape.size() < 2) throw ValidationError("model shape needs at least two widths");
  for (std::size_t w : shape) {
    if (w == 0) throw ValidationError("model widths must be >= 1");
  }
  if (family == "kan") spline.validate();
}

std::size_t ModelSpec::param_count() const {
  return family == "kan" ? kan_param_count(shape, spline) : mlp_param_count(shape);
}

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json j = {{"family", family}, {"shape", shape}};
  if (family == "kan") {
    j["spline"] = {{"degree", spline.degree},
                   {"intervals", spline.intervals},
                   {"range", {spline.range_lo, spline.range_hi}}};
  }
  return j;
}

std::optional<ModelSpec> find_preset(const std::string& name) {
  const SplineSpec cubic{3, 5, -1.0, 1.0};
  if (name == "mlp-3depth") return ModelSpec{"mlp", {168, 300, 300, 300, 24}, cubic};
  if (name == "mlp-4depth") return ModelSpec{"mlp", {168, 300, 300, 300, 300, 24}, cubic};
  if (name == "kan-3depth") return ModelSpec{"kan", {168, 40, 40, 24}, cubic};
  if (name == "kan-4depth") return ModelSpec{"kan", {168, 40, 40, 40, 24}, cubic};
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  return {"mlp-3depth", "mlp-4depth", "kan-3depth", "kan-4depth"};
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.family == "kan") return KanNetwork(spec.shape, spec.spline, seed);
  return MlpNetwork(spec.shape, seed);
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  window.validate();
  if (model.shape.front() != window.context || model.shape.back() != window.prediction) {
    throw ValidationError("model shape " + shape_string(model.shape) +
                          " does not match context " + std::to_string(window.context) +
                          " / prediction " + std::to_string(window.prediction));
  }
}

nlohmann::json RunConfig::to_json() const {
  return {{"preset", preset},
          {"model", model.to_json()},
          {"train",
           {{"epochs", train.epochs},
            {"learning_rate", train.learning_rate},
            {"adam_beta1", train.adam_beta1},
            {"adam_beta2", train.adam_beta2},
            {"adam_eps", train.adam_eps},
            {"batch_size", train.batch_size},
            {"seed", train.seed}}},
          {"window", {{"context", window.context}, {"prediction", window.prediction}}},
          {"data", data.to_json()},
          {"seed", seed},
          {"track_test", track_test}};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path default_output_dir(const std::string& command) {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
    return fs::path(root) / command;
  }
  return fs::path("runs") / command;
}

void write_loss_curve_csv(const LossCurve& curve, std::ostream& out) {
  const bool with_test = curve.test.size() == curve.train.size() && !curve.test.empty();
  out << (with_test ? "epoch,train_mae,test_mae\n" : "epoch,train_mae\n");
  for (std::size_t e = 0; e < curve.train.size(); ++e) {
    out << (e + 1) << ',' << shortest(curve.train[e]);
    if (with_test) out << ',' << shortest(curve.test[e]);
    out << '\n';
  }
}

void cmd_generate(int beams, int days, std::uint64_t seed, const fs::path& out) {
  const SeriesSet set = generate_synthetic(beams, days, seed);
  auto file = open_out(out);
  write_csv(set, file);
  if (!file) throw std::runtime_error("failed writing " + out.string());
}

TrainOutcome cmd_train(const RunConfig& cfg, std::ostream* log, int log_every) {
  cfg.validate();
  const SeriesSet raw = cfg.data.load();
  const PreparedSplit split = prepare_split(raw);
  const WindowedDataset train_set = make_windows(split.train, cfg.window, 1, "train");
  std::optional<WindowedDataset> test_set;
  if (cfg.track_test && split.test.length() >= cfg.window.context + cfg.window.prediction) {
    test_set = make_windows(split.test, cfg.window, 1, "test");
  }

  Model model = build_model(cfg.model, cfg.seed);
  if (log) {
    *log << "training " << model_family(model) << ' ' << shape_string(cfg.model.shape)
         << " (" << param_count(model) << " parameters) on " << train_set.size()
         << " windows\n";
  }
  EpochCallback progress;
  if (log && log_every > 0) {
    progress = [&](int epoch, double tr, double te) {
      if (epoch == 1 || epoch % log_every == 0 || epoch == cfg.train.epochs) {
        *log << "epoch " << epoch << " train_mae " << tr;
        if (std::isfinite(te)) *log << " test_mae " << te;
        *log << '\n';
      }
    };
  }
  LossCurve curve = train(model, train_set, cfg.train,
                          test_set ? &*test_set : nullptr, progress);

  fs::create_directories(cfg.out_dir);
  Checkpoint ckpt{std::move(model), cfg.window, split.records};
  save_checkpoint(ckpt, cfg.out_dir / "checkpoint.json");
  {
    auto out = open_out(cfg.out_dir / "loss_curve.csv");
    write_loss_curve_csv(curve, out);
  }

  const nlohmann::json config = cfg.to_json();
  nlohmann::json manifest = {
      {"command", "train"},
      {"code_version", kVersion},
      {"config", config},
      {"config_hash", fnv1a_hex(config.dump())},
      {"seeds",
       {{"model", cfg.seed},
        {"train", cfg.train.seed},
        {"data", cfg.data.csv ? nlohmann::json(nullptr)
                              : nlohmann::json(cfg.data.synthetic_seed)}}},
      {"param_count", param_count(ckpt.model)},
      {"train_windows", train_set.size()},
      {"epochs_completed", curve.size()},
      {"final_train_mae", curve.train.back()},
      {"checkpoint_hash", fnv1a_hex(serialize_checkpoint(ckpt))}};
  if (!curve.test.empty()) manifest["final_test_mae"] = curve.test.back();
  write_json(manifest, cfg.out_dir / "manifest.json");
  return TrainOutcome{std::move(ckpt), std::move(curve), std::move(manifest)};
}

std::vector<MetricsReport> cmd_eval(const EvalRequest& req) {
  if (req.checkpoints.empty()) throw ValidationError("no checkpoint given");
  std::vector<MetricsReport> reports;
  for (const fs::path& path : req.checkpoints) {
    const Checkpoint ckpt = load_checkpoint(path);
    std::vector<NormalizationRecord> records;
    const WindowedDataset data = windows_for_split(ckpt, req.data, req.split, records);
    if (data.empty()) {
      throw ValidationError("the " + req.split + " split has no complete window");
    }
    EvalOptions opts;
    opts.denormalize = req.denormalize;
    opts.records = records;
    std::string id = path.parent_path().filename().string();
    if (id.empty()) id = path.stem().string();
    reports.push_back(evaluate(ckpt.model, data, id, opts));
  }
  if (reports.size() >= 2) reports = compare(std::move(reports));
  if (req.out_dir) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    write_json(arr, *req.out_dir / "metrics.json");
    auto out = open_out(*req.out_dir / "metrics.txt");
    out << format_table(reports);
  }
  return reports;
}

void cmd_forecast(const ForecastRequest& req) {
  const Checkpoint ckpt = load_checkpoint(req.checkpoint);
  const SeriesSet raw = req.data.load();
  auto [train, test] = split_train_test(raw);
  std::vector<NormalizationRecord> records =
      ckpt.normalization.empty() ? fit_normalization(train) : ckpt.normalization;
  if (req.beam >= raw.beams.size() || req.beam >= records.size()) {
    throw ValidationError("beam index " + std::to_string(req.beam) + " out of range");
  }
  const std::size_t c = ckpt.window.context;
  const std::size_t horizon = ckpt.window.prediction;
  const std::size_t test_lo = test.offset;
  const std::size_t test_hi = test.offset + test.length();
  const std::size_t t0 = req.t0.value_or(test_lo + c);
  if (t0 < test_lo + c || t0 + horizon > test_hi) {
    throw ValidationError("t0 = " + std::to_string(t0) +
                          " leaves an incomplete window inside the test range [" +
                          std::to_string(test_lo) + ", " + std::to_string(test_hi) + ")");
  }
  const NormalizationRecord& rec = records[req.beam];
  const std::vector<double>& series = raw.beams[req.beam].values;
  const std::vector<double> context_norm = normalize(
      std::span<const double>(series).subspan(t0 - c, c), rec);
  Matrix x(1, static_cast<long>(c));
  for (std::size_t i = 0; i < c; ++i) x(0, static_cast<long>(i)) = context_norm[i];
  const Matrix y = predict(ckpt.model, x);
  const std::vector<double> pred =
      denormalize(std::span<const double>(y.data(), horizon), rec);

  auto out = open_out(req.out);
  out << "beam,t,timestamp,segment,actual,predicted\n";
  const std::string& name = raw.beams[req.beam].name;
  for (std::size_t t = t0 - c; t < t0 + horizon; ++t) {
    const bool is_context = t < t0;
    out << name << ',' << t << ','
        << format_timestamp(raw.start + std::chrono::hours{static_cast<long>(t)}) << ','
        << (is_context ? "context" : "prediction") << ',' << shortest(series[t]) << ',';
    if (!is_context) out << shortest(pred[t - t0]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + req.out.string());
}

void AblationGrid::validate() const {
  if (nodes.empty() || grids.empty()) {
    throw ValidationError("ablation node and grid lists must be non-empty");
  }
  for (std::size_t n : nodes) {
    if (n == 0) throw ValidationError("ablation node counts must be >= 1");
  }
  for (int g : grids) {
    if (g < 1) throw ValidationError("ablation grid sizes must be >= 1");
  }
  if (degree < 0) throw ValidationError("spline degree must be >= 0");
}

double AblationRun::final_loss() const {
  return curve.train.empty() ? std::nan("") : curve.train.back();
}

std::vector<AblationRun> cmd_ablate(const AblationRequest& req, std::ostream* log) {
  req.grid.validate();
  req.train.validate();
  req.window.validate();
  const SeriesSet raw = req.data.load();
  const PreparedSplit split = prepare_split(raw);
  const WindowedDataset train_set = make_windows(split.train, req.window, 1, "train");

  std::vector<AblationRun> runs;
  for (std::size_t n : req.grid.nodes) {
    for (int g : req.grid.grids) {
      ModelSpec spec{"kan", {req.window.context, n, req.window.prediction},
                     SplineSpec{req.grid.degree, g, -1.0, 1.0}};
      AblationRun run{n, g, spec.param_count(), true, {}, {}};
      if (log) {
        *log << "ablation n=" << n << " G=" << g << " (" << run.param_count
             << " parameters)\n";
      }
      try {
        KanNetwork net(spec.shape, spec.spline, req.seed);
        run.curve = train(net, train_set, req.train);
      } catch (const DivergenceError& e) {
        run.ok = false;
        run.message = e.what();
      }
      const fs::path dir = req.out_dir / ("n" + std::to_string(n) + "_G" + std::to_string(g));
      fs::create_directories(dir);
      auto out = open_out(dir / "loss_curve.csv");
      write_loss_curve_csv(run.curve, out);
      runs.push_back(std::move(run));
    }
  }

  auto all = open_out(req.out_dir / "ablation.csv");
  all << "n,G,epoch,train_loss\n";
  for (const AblationRun& run : runs) {
    for (std::size_t e = 0; e < run.curve.train.size(); ++e) {
      all << run.nodes << ',' << run.grid << ',' << (e + 1) << ','
          << shortest(run.curve.train[e]) << '\n';
    }
  }
  auto summary = open_out(req.out_dir / "ablation_runs.csv");
  summary << "n,G,parameters,status,final_loss,message\n";
  for (const AblationRun& run : runs) {
    std::string msg = run.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    summary << run.nodes << ',' << run.grid << ',' << run.param_count << ','
            << (run.ok ? "ok" : "diverged") << ','
            << (run.ok ? shortest(run.final_loss()) : std::string()) << ',' << msg << '\n';
  }
  const nlohmann::json manifest = {
      {"command", "ablate"},
      {"code_version", kVersion},
      {"nodes", req.grid.nodes},
      {"grids", req.grid.grids},
      {"degree", req.grid.degree},
      {"epochs", req.train.epochs},
      {"learning_rate", req.train.learning_rate},
      {"batch_size", req.train.batch_size},
      {"seeds", {{"model", req.seed}, {"train", req.train.seed}}},
      {"data", req.data.to_json()},
      {"window", {{"context", req.window.context}, {"prediction", req.window.prediction}}}};
  write_json(manifest, req.out_dir / "manifest.json");
  return runs;
}

}  // namespace kants
