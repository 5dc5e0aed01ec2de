#include "kants/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "kants/error.hpp"

namespace kants {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <Network N>
double batch_step(N& model, const Matrix& inputs, const Matrix& targets,
                  AdamState& state, const TrainConfig& cfg) {
  typename N::Trace trace;
  const Matrix pred = model.forward(inputs, &trace);
  Matrix grad;
  const double loss = mae_loss(pred, targets, &grad);
  if (!std::isfinite(loss)) return loss;
  const Gradients g = model.backward(trace, grad);
  adam_step(model.mutable_parameters(), g.params, state, cfg);
  return loss;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be > 0");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ValidationError("Adam epsilon must be > 0");
}

MaeResult mae_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ValidationError("MAE: prediction has " + std::to_string(pred.size()) +
                          " values, target has " + std::to_string(target.size()));
  }
  if (pred.empty()) throw ValidationError("MAE: empty input");
  const double n = static_cast<double>(pred.size());
  MaeResult out{0.0, std::vector<double>(pred.size())};
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const double r = pred[t] - target[t];
    out.loss += std::abs(r);
    out.grad[t] = sign(r) / n;
  }
  out.loss /= n;
  return out;
}

double mae_loss(const Matrix& pred, const Matrix& target, Matrix* grad) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ValidationError("MAE: prediction and target shapes differ");
  }
  if (pred.size() == 0) throw ValidationError("MAE: empty input");
  const double n = static_cast<double>(pred.size());
  const Matrix residual = pred - target;
  if (grad) {
    *grad = residual.unaryExpr([n](double r) { return sign(r) / n; });
  }
  return residual.cwiseAbs().sum() / n;
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const TrainConfig& cfg) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw ContractError("Adam: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

template <Network N>
LossCurve train(N& model, const WindowedDataset& data, const TrainConfig& cfg,
                const WindowedDataset* test, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.empty()) throw ValidationError("training dataset is empty");
  const auto check_widths = [&](const WindowedDataset& d, const char* what) {
    if (model.input_width() != d.spec().context ||
        model.output_width() != d.spec().prediction) {
      throw ValidationError(std::string("model widths [") +
                            std::to_string(model.input_width()) + " -> " +
                            std::to_string(model.output_width()) + "] do not match " +
                            what + " windows (context " +
                            std::to_string(d.spec().context) + ", prediction " +
                            std::to_string(d.spec().prediction) + ")");
    }
  };
  check_widths(data, "training");
  if (test) check_widths(*test, "test");

  const std::size_t n = data.size();
  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  AdamState state(model.param_count());
  LossCurve curve;
  curve.train.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    try {
      if (full_batch) {
        epoch_loss = batch_step(model, data.contexts(), data.targets(), state, cfg);
      } else {
        std::shuffle(order.begin(), order.end(), rng);
        double weighted = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
          const std::size_t stop = std::min(n, start + cfg.batch_size);
          const WindowedDataset batch =
              data.subset(std::span<const std::size_t>(order).subspan(start, stop - start));
          const double loss =
              batch_step(model, batch.contexts(), batch.targets(), state, cfg);
          weighted += loss * static_cast<double>(stop - start);
          if (!std::isfinite(weighted)) break;
        }
        epoch_loss = weighted / static_cast<double>(n);
      }
    } catch (const NumericOverflowError& e) {
      throw DivergenceError(epoch, "training diverged at epoch " +
                                       std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError(epoch, "training diverged at epoch " +
                                       std::to_string(epoch) + ": loss is not finite");
    }
    curve.train.push_back(epoch_loss);

    double test_loss = std::nan("");
    if (test && !test->empty()) {
      try {
        test_loss = mae_loss(model.forward(test->contexts()), test->targets(), nullptr);
      } catch (const NumericOverflowError& e) {
        throw DivergenceError(epoch, "test evaluation diverged at epoch " +
                                         std::to_string(epoch) + ": " + e.what());
      }
      curve.test.push_back(test_loss);
    }
    if (on_epoch) on_epoch(epoch, epoch_loss, test_loss);
  }
  return curve;
}

template LossCurve train<KanNetwork>(KanNetwork&, const WindowedDataset&,
                                     const TrainConfig&, const WindowedDataset*,
                                     const EpochCallback&);
template LossCurve train<MlpNetwork>(MlpNetwork&, const WindowedDataset&,
                                     const TrainConfig&, const WindowedDataset*,
                                     const EpochCallback&);

LossCurve train(Model& model, const WindowedDataset& data, const TrainConfig& cfg,
                const WindowedDataset* test, const EpochCallback& on_epoch) {
  return std::visit(
      [&](auto& net) { return train(net, data, cfg, test, on_epoch); }, model);
}

}  // namespace kants
