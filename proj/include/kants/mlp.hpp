#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kants/gradients.hpp"
#include "kants/linalg.hpp"

namespace kants {

struct MlpTrace {
  TraceStamp stamp;
  /// Input to each layer (the network input, then post-ReLU activations).
  std::vector<Matrix> inputs;
  /// Pre-activations of the hidden layers, for the ReLU mask.
  std::vector<Matrix> pre_activations;
};

/// Fully connected ReLU network with a linear output layer.
///
/// Parameter layout: per layer, the n_out x n_in weight matrix (row-major)
/// followed by the n_out biases.
class MlpNetwork {
 public:
  using Trace = MlpTrace;

  MlpNetwork(std::vector<std::size_t> shape, std::uint64_t seed);

  MlpNetwork(const MlpNetwork& other);
  MlpNetwork& operator=(const MlpNetwork& other);
  MlpNetwork(MlpNetwork&&) noexcept = default;
  MlpNetwork& operator=(MlpNetwork&&) noexcept = default;

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_layers() const { return shape_.size() - 1; }
  std::size_t input_width() const { return shape_.front(); }
  std::size_t output_width() const { return shape_.back(); }
  std::size_t param_count() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters();

  std::span<double> weights(std::size_t layer);
  std::span<double> biases(std::size_t layer);

  Matrix forward(const Matrix& x, Trace* trace = nullptr) const;
  std::vector<double> forward(std::span<const double> x,
                              Trace* trace = nullptr) const;
  Gradients backward(const Trace& trace, const Matrix& output_grad,
                     bool want_input_grad = false) const;

 private:
  using ConstMap = Eigen::Map<const Matrix>;
  ConstMap weight_map(std::size_t layer) const;
  Eigen::Map<const Eigen::RowVectorXd> bias_map(std::size_t layer) const;
  TraceStamp stamp() const { return {id_, version_}; }

  std::vector<std::size_t> shape_;
  std::uint64_t seed_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::uint64_t id_;
  std::uint64_t version_ = 0;
};

MlpNetwork new_mlp(std::vector<std::size_t> shape, std::uint64_t seed);

/// sum_l (n_l + 1) * n_{l+1}.
std::size_t mlp_param_count(std::span<const std::size_t> shape);

}  // namespace kants
