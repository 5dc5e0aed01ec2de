// kants: train, evaluate and ablate KAN / MLP forecasters on hourly series.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kants/app.hpp"
#include "kants/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct DataFlags {
  std::string csv;
  int beams = 6;
  int days = 30;
  std::uint64_t seed = 7;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--data", csv, "CSV file (timestamp,beam_1,...); synthetic data if omitted");
    cmd->add_option("--synthetic-beams", beams, "Beams for generated data")->capture_default_str();
    cmd->add_option("--synthetic-days", days, "Days for generated data")->capture_default_str();
    cmd->add_option("--data-seed", seed, "Seed for generated data")->capture_default_str();
  }
  kants::DataSource source() const {
    kants::DataSource src;
    if (!csv.empty()) src.csv = csv;
    src.synthetic_beams = beams;
    src.synthetic_days = days;
    src.synthetic_seed = seed;
    return src;
  }
};

struct TrainFlags {
  int epochs = 500;
  double lr = 1e-3;
  std::size_t batch_size = 0;
  std::uint64_t train_seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Mini-batch size (0 = full batch)")
        ->capture_default_str();
    cmd->add_option("--train-seed", train_seed, "Seed for window shuffling")
        ->capture_default_str();
  }
  kants::TrainConfig config() const {
    kants::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch_size;
    cfg.seed = train_seed;
    return cfg;
  }
};

std::filesystem::path or_default(const std::string& given, const std::string& command) {
  return given.empty() ? kants::default_output_dir(command) : std::filesystem::path(given);
}

// Keys outside any [section] belong to the subcommand being run, so a flat
// file works with `kants train --config run.ini`.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> items = CLI::ConfigINI::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (CLI::ConfigItem& item : items) {
      if (item.parents.empty()) item.parents = {subs.front()->get_name()};
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KAN and MLP time-series forecasting toolkit"};
  app.set_version_flag("--version", kants::kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file; command-line flags win");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic satellite-traffic CSV");
  int gen_beams = 6, gen_days = 30;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "data.csv";
  gen->add_option("--beams", gen_beams, "Number of beams")->capture_default_str();
  gen->add_option("--days", gen_days, "Number of days (>= 23)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output CSV path")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train one model and write checkpoint, curve, manifest");
  std::string preset, family, out_dir;
  std::vector<std::size_t> shape;
  std::optional<int> grid, degree;
  std::optional<double> range_lo, range_hi;
  std::size_t context = 168, prediction = 24;
  std::uint64_t model_seed = 1;
  bool no_test = false;
  int log_every = 50;
  DataFlags tr_data;
  TrainFlags tr_train;
  tr->add_option("--preset", preset, "mlp-3depth | mlp-4depth | kan-3depth | kan-4depth");
  tr->add_option("--family", family, "kan | mlp (overrides the preset)");
  tr->add_option("--shape", shape, "Layer widths, e.g. 168,40,24")->delimiter(',');
  tr->add_option("--grid", grid, "Spline interval count G");
  tr->add_option("--degree", degree, "Spline degree k");
  tr->add_option("--range-lo", range_lo, "Spline grid lower bound");
  tr->add_option("--range-hi", range_hi, "Spline grid upper bound");
  tr->add_option("--context", context, "Context length c")->capture_default_str();
  tr->add_option("--prediction", prediction, "Prediction length T")->capture_default_str();
  tr->add_option("--seed", model_seed, "Model initialization seed")->capture_default_str();
  tr->add_flag("--no-test", no_test, "Skip per-epoch test MAE");
  tr->add_option("--log-every", log_every, "Progress interval in epochs (0 = quiet)")
      ->capture_default_str();
  tr->add_option("-o,--out-dir", out_dir, "Run directory");
  tr_data.add_to(tr);
  tr_train.add_to(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate checkpoints on the test split");
  std::vector<std::string> ev_ckpts;
  std::string ev_split = "test", ev_out;
  bool ev_denorm = false;
  DataFlags ev_data;
  ev->add_option("-c,--checkpoint", ev_ckpts, "Checkpoint file(s)")->required();
  ev->add_option("--split", ev_split, "test | train")->capture_default_str();
  ev->add_flag("--denormalize", ev_denorm, "Report metrics in original units");
  ev->add_option("-o,--out-dir", ev_out, "Directory for metrics.json / metrics.txt");
  ev_data.add_to(ev);

  // forecast
  auto* fc = app.add_subcommand("forecast", "Write a plot-ready forecast CSV for one window");
  std::string fc_ckpt, fc_out = "forecast.csv";
  std::size_t fc_beam = 0;
  std::optional<std::size_t> fc_t0;
  DataFlags fc_data;
  fc->add_option("-c,--checkpoint", fc_ckpt, "Checkpoint file")->required();
  fc->add_option("--beam", fc_beam, "Beam index (0-based)")->capture_default_str();
  fc->add_option("--t0", fc_t0, "Absolute hour index of the first forecast step");
  fc->add_option("-o,--output", fc_out, "Output CSV")->capture_default_str();
  fc_data.add_to(fc);

  // ablate
  auto* ab = app.add_subcommand("ablate", "Node-count x grid-size sweep of 2-layer KANs");
  kants::AblationGrid ab_grid;
  std::uint64_t ab_seed = 1;
  std::string ab_out;
  std::size_t ab_context = 168, ab_prediction = 24;
  DataFlags ab_data;
  TrainFlags ab_train;
  ab->add_option("--nodes", ab_grid.nodes, "Hidden widths n")->delimiter(',')->capture_default_str();
  ab->add_option("--grids", ab_grid.grids, "Grid sizes G")->delimiter(',')->capture_default_str();
  ab->add_option("--degree", ab_grid.degree, "Spline degree k")->capture_default_str();
  ab->add_option("--seed", ab_seed, "Model initialization seed")->capture_default_str();
  ab->add_option("--context", ab_context, "Context length c")->capture_default_str();
  ab->add_option("--prediction", ab_prediction, "Prediction length T")->capture_default_str();
  ab->add_option("-o,--out-dir", ab_out, "Output directory");
  ab_data.add_to(ab);
  ab_train.add_to(ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*gen) {
      kants::cmd_generate(gen_beams, gen_days, gen_seed, gen_out);
      std::cout << "wrote " << gen_out << '\n';
    } else if (*tr) {
      kants::RunConfig cfg;
      if (!preset.empty()) {
        const auto p = kants::find_preset(preset);
        if (!p) throw kants::ValidationError("unknown preset '" + preset + "'");
        cfg.model = *p;
        cfg.preset = preset;
      } else {
        cfg.model.shape = {context, 40, prediction};
      }
      if (!family.empty()) cfg.model.family = family;
      if (!shape.empty()) cfg.model.shape = shape;
      if (grid) cfg.model.spline.intervals = *grid;
      if (degree) cfg.model.spline.degree = *degree;
      if (range_lo) cfg.model.spline.range_lo = *range_lo;
      if (range_hi) cfg.model.spline.range_hi = *range_hi;
      cfg.window = {context, prediction};
      cfg.train = tr_train.config();
      cfg.data = tr_data.source();
      cfg.seed = model_seed;
      cfg.track_test = !no_test;
      cfg.out_dir = or_default(out_dir, "train");
      const auto outcome = kants::cmd_train(cfg, &std::cerr, log_every);
      std::cout << "parameters " << outcome.manifest["param_count"] << '\n'
                << "final_train_mae " << outcome.curve.train.back() << '\n'
                << "wrote " << cfg.out_dir.string() << '\n';
    } else if (*ev) {
      kants::EvalRequest req;
      for (const auto& c : ev_ckpts) req.checkpoints.emplace_back(c);
      req.data = ev_data.source();
      req.split = ev_split;
      req.denormalize = ev_denorm;
      if (!ev_out.empty()) req.out_dir = ev_out;
      const auto reports = kants::cmd_eval(req);
      std::cout << kants::format_table(reports);
    } else if (*fc) {
      kants::ForecastRequest req;
      req.checkpoint = fc_ckpt;
      req.data = fc_data.source();
      req.beam = fc_beam;
      req.t0 = fc_t0;
      req.out = fc_out;
      kants::cmd_forecast(req);
      std::cout << "wrote " << fc_out << '\n';
    } else if (*ab) {
      kants::AblationRequest req;
      req.grid = ab_grid;
      req.data = ab_data.source();
      req.train = ab_train.config();
      req.window = {ab_context, ab_prediction};
      req.seed = ab_seed;
      req.out_dir = or_default(ab_out, "ablate");
      const auto runs = kants::cmd_ablate(req, &std::cerr);
      for (const auto& run : runs) {
        std::cout << "n=" << run.nodes << " G=" << run.grid << " params=" << run.param_count
                  << (run.ok ? " final_loss=" + std::to_string(run.final_loss())
                             : " diverged: " + run.message)
                  << '\n';
      }
    }
  } catch (const kants::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const kants::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
