#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kants/gradients.hpp"
#include "kants/linalg.hpp"
#include "kants/spline.hpp"

namespace kants {

double silu(double x);
/// sigma(x) * (1 + x * (1 - sigma(x))).
double silu_derivative(double x);

/// Mutable view of one learnable edge function
/// phi(x) = base_weight * silu(x) + spline_scale * spline(x).
struct EdgeRef {
  std::span<double> coeffs;
  double& base_weight;
  double& spline_scale;
};

struct ConstEdgeRef {
  std::span<const double> coeffs;
  const double& base_weight;
  const double& spline_scale;
};

/// Saved activations of one KAN forward pass.
///
/// For layer l, `features[l]` holds, per input node i, the block
/// [silu(x_i), B_0(x_i), ..., B_{M-1}(x_i)] and `feature_derivs[l]` the
/// matching x-derivatives. `weights[l]` is the folded weight matrix that
/// multiplies the features.
struct KanTrace {
  TraceStamp stamp;
  std::vector<Matrix> features;
  std::vector<Matrix> feature_derivs;
  std::vector<Matrix> weights;
};

/// Kolmogorov-Arnold network of shape [n_1, ..., n_{L+1}].
///
/// Each of the L layers holds an n_in x n_out matrix of edge functions
/// sharing one spline grid; a node sums its incoming edges. Parameters live
/// in one flat buffer, layer-major, then edge (i, j) row-major with
/// i over inputs, and per edge [c_0 .. c_{M-1}, base_weight, spline_scale].
class KanNetwork {
 public:
  using Trace = KanTrace;

  KanNetwork(std::vector<std::size_t> shape, const SplineSpec& spec,
             std::uint64_t seed);

  KanNetwork(const KanNetwork& other);
  KanNetwork& operator=(const KanNetwork& other);
  KanNetwork(KanNetwork&&) noexcept = default;
  KanNetwork& operator=(KanNetwork&&) noexcept = default;

  const std::vector<std::size_t>& shape() const { return shape_; }
  const SplineSpec& spec() const { return grid_.spec(); }
  const KnotGrid& grid() const { return grid_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_layers() const { return shape_.size() - 1; }
  std::size_t input_width() const { return shape_.front(); }
  std::size_t output_width() const { return shape_.back(); }
  std::size_t params_per_edge() const { return grid_.basis_count() + 2; }
  std::size_t param_count() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  /// Any write through this span invalidates outstanding traces.
  std::span<double> mutable_parameters();

  ConstEdgeRef edge(std::size_t layer, std::size_t in, std::size_t out) const;
  EdgeRef edge(std::size_t layer, std::size_t in, std::size_t out);
  /// phi_{in,out}(x) of one layer evaluated directly.
  double edge_value(std::size_t layer, std::size_t in, std::size_t out,
                    double x) const;

  /// Batched forward pass; rows of `x` are samples. Fills `trace` if given.
  Matrix forward(const Matrix& x, Trace* trace = nullptr) const;
  std::vector<double> forward(std::span<const double> x,
                              Trace* trace = nullptr) const;
  /// Applies a single layer.
  Matrix forward_layer(std::size_t layer, const Matrix& x) const;

  /// Reverse pass for d(loss)/d(output) = `output_grad`, summed over rows.
  Gradients backward(const Trace& trace, const Matrix& output_grad,
                     bool want_input_grad = false) const;

 private:
  std::size_t layer_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t edge_offset(std::size_t layer, std::size_t in,
                          std::size_t out) const;
  Matrix folded_weights(std::size_t layer) const;
  void expand_features(std::size_t layer, const Matrix& x, Matrix& features,
                       Matrix* derivs) const;
  TraceStamp stamp() const { return {id_, version_}; }

  std::vector<std::size_t> shape_;
  KnotGrid grid_;
  std::uint64_t seed_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::uint64_t id_;
  std::uint64_t version_ = 0;
};

KanNetwork new_kan(std::vector<std::size_t> shape, const SplineSpec& spec,
                   std::uint64_t seed);

/// sum_l n_l * n_{l+1} * (G + k + 2).
std::size_t kan_param_count(std::span<const std::size_t> shape,
                            const SplineSpec& spec);

}  // namespace kants
