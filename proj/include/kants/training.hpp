#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kants/data.hpp"
#include "kants/model.hpp"

namespace kants {

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// 0 means full batch: one optimizer step per epoch over every window.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adam first/second moments, one entry per parameter.
struct AdamState {
  AdamState() = default;
  explicit AdamState(std::size_t n) : first_moment(n, 0.0), second_moment(n, 0.0) {}

  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;
};

/// Per-epoch mean training MAE and, when a test set was given, test MAE.
struct LossCurve {
  std::vector<double> train;
  std::vector<double> test;
  std::size_t size() const { return train.size(); }
};

struct MaeResult {
  double loss;
  std::vector<double> grad;
};

/// (1/T) sum |pred - target| and its subgradient sign(pred - target) / T,
/// with sign(0) = 0.
MaeResult mae_loss(std::span<const double> pred, std::span<const double> target);

/// MAE over every entry of a batch; writes d(loss)/d(pred) into `grad`.
double mae_loss(const Matrix& pred, const Matrix& target, Matrix* grad);

/// One bias-corrected Adam update.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, const TrainConfig& cfg);

using EpochCallback = std::function<void(int epoch, double train_mae, double test_mae)>;

/// Trains in place and returns the loss curve. Windows are visited in a
/// seed-shuffled order each epoch; batch gradients are reduced in row order.
/// Throws DivergenceError when the loss stops being finite.
template <Network N>
LossCurve train(N& model, const WindowedDataset& data, const TrainConfig& cfg,
                const WindowedDataset* test = nullptr,
                const EpochCallback& on_epoch = {});

LossCurve train(Model& model, const WindowedDataset& data, const TrainConfig& cfg,
                const WindowedDataset* test = nullptr,
                const EpochCallback& on_epoch = {});

}  // namespace kants
