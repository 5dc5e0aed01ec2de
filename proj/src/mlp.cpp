#include "kants/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "kants/error.hpp"

namespace kants {

std::size_t mlp_param_count(std::span<const std::size_t> shape) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
    total += (shape[l] + 1) * shape[l + 1];
  }
  return total;
}

MlpNetwork::MlpNetwork(std::vector<std::size_t> shape, std::uint64_t seed)
    : shape_(std::move(shape)), seed_(seed), id_(next_network_id()) {
  if (shape_.size() < 2) {
    throw ValidationError("network shape needs at least two widths");
  }
  for (std::size_t w : shape_) {
    if (w == 0) throw ValidationError("network widths must be >= 1");
  }
  offsets_.resize(num_layers() + 1, 0);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    offsets_[l + 1] = offsets_[l] + (shape_[l] + 1) * shape_[l + 1];
  }
  params_.assign(offsets_.back(), 0.0);

  std::mt19937_64 rng(seed_);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(shape_[l] + shape_[l + 1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    double* w = params_.data() + offsets_[l];
    for (std::size_t e = 0; e < shape_[l] * shape_[l + 1]; ++e) w[e] = dist(rng);
  }
}

MlpNetwork::MlpNetwork(const MlpNetwork& other)
    : shape_(other.shape_),
      seed_(other.seed_),
      offsets_(other.offsets_),
      params_(other.params_),
      id_(next_network_id()) {}

MlpNetwork& MlpNetwork::operator=(const MlpNetwork& other) {
  if (this != &other) {
    shape_ = other.shape_;
    seed_ = other.seed_;
    offsets_ = other.offsets_;
    params_ = other.params_;
    id_ = next_network_id();
    version_ = 0;
  }
  return *this;
}

std::span<double> MlpNetwork::mutable_parameters() {
  ++version_;
  return params_;
}

std::span<double> MlpNetwork::weights(std::size_t layer) {
  if (layer >= num_layers()) throw ValidationError("layer index out of range");
  ++version_;
  return {params_.data() + offsets_[layer], shape_[layer] * shape_[layer + 1]};
}

std::span<double> MlpNetwork::biases(std::size_t layer) {
  if (layer >= num_layers()) throw ValidationError("layer index out of range");
  ++version_;
  return {params_.data() + offsets_[layer] + shape_[layer] * shape_[layer + 1],
          shape_[layer + 1]};
}

MlpNetwork::ConstMap MlpNetwork::weight_map(std::size_t layer) const {
  return ConstMap(params_.data() + offsets_[layer],
                  static_cast<long>(shape_[layer + 1]),
                  static_cast<long>(shape_[layer]));
}

Eigen::Map<const Eigen::RowVectorXd> MlpNetwork::bias_map(std::size_t layer) const {
  return Eigen::Map<const Eigen::RowVectorXd>(
      params_.data() + offsets_[layer] + shape_[layer] * shape_[layer + 1],
      static_cast<long>(shape_[layer + 1]));
}

Matrix MlpNetwork::forward(const Matrix& x, Trace* trace) const {
  if (static_cast<std::size_t>(x.cols()) != input_width()) {
    throw ValidationError("MLP expects input width " +
                          std::to_string(input_width()) + ", got " +
                          std::to_string(x.cols()));
  }
  if (trace) {
    trace->stamp = stamp();
    trace->inputs.assign(num_layers(), Matrix());
    trace->pre_activations.assign(num_layers(), Matrix());
  }
  Matrix h = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    Matrix z = h * weight_map(l).transpose();
    z.rowwise() += bias_map(l);
    if (!z.allFinite()) {
      throw NumericOverflowError(
          l, "non-finite output from MLP layer " + std::to_string(l));
    }
    if (trace) trace->inputs[l] = std::move(h);
    if (l + 1 < num_layers()) {
      h = z.cwiseMax(0.0);
      if (trace) trace->pre_activations[l] = std::move(z);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

std::vector<double> MlpNetwork::forward(std::span<const double> x,
                                        Trace* trace) const {
  if (x.size() != input_width()) {
    throw ValidationError("MLP expects input width " +
                          std::to_string(input_width()) + ", got " +
                          std::to_string(x.size()));
  }
  Matrix row(1, static_cast<long>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<long>(i)) = x[i];
  const Matrix y = forward(row, trace);
  return std::vector<double>(y.data(), y.data() + y.size());
}

Gradients MlpNetwork::backward(const Trace& trace, const Matrix& output_grad,
                               bool want_input_grad) const {
  if (!(trace.stamp == stamp()) || trace.inputs.size() != num_layers()) {
    throw ContractError("MLP trace does not belong to this parameter state");
  }
  const long rows = trace.inputs.front().rows();
  if (output_grad.rows() != rows ||
      static_cast<std::size_t>(output_grad.cols()) != output_width()) {
    throw ContractError("output gradient shape does not match the trace");
  }

  Gradients grads;
  grads.params.assign(params_.size(), 0.0);
  Matrix upstream = output_grad;
  for (std::size_t l = num_layers(); l-- > 0;) {
    if (l + 1 < num_layers()) {
      // ReLU subgradient at 0 is 0.
      upstream = (trace.pre_activations[l].array() > 0.0)
                     .select(upstream, 0.0);
    }
    const long n_in = static_cast<long>(shape_[l]);
    const long n_out = static_cast<long>(shape_[l + 1]);
    // Reduce into Eigen-owned (aligned) buffers first: Eigen's packet paths
    // peel differently on unaligned destinations, which changes rounding.
    const Matrix wg = upstream.transpose() * trace.inputs[l];
    const Eigen::RowVectorXd bg = upstream.colwise().sum();
    double* dst = grads.params.data() + offsets_[l];
    std::copy(wg.data(), wg.data() + n_out * n_in, dst);
    std::copy(bg.data(), bg.data() + n_out, dst + n_out * n_in);
    if (l == 0 && !want_input_grad) break;
    upstream = upstream * weight_map(l);
  }
  if (want_input_grad) grads.input = std::move(upstream);
  return grads;
}

MlpNetwork new_mlp(std::vector<std::size_t> shape, std::uint64_t seed) {
  return MlpNetwork(std::move(shape), seed);
}

}  // namespace kants
