#include "kants/kan.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "kants/error.hpp"

namespace kants {

std::uint64_t next_network_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void validate_shape(const std::vector<std::size_t>& shape) {
  if (shape.size() < 2) {
    throw ValidationError("network shape needs at least two widths");
  }
  for (std::size_t w : shape) {
    if (w == 0) throw ValidationError("network widths must be >= 1");
  }
}

}  // namespace

double silu(double x) { return x * sigmoid(x); }

double silu_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

std::size_t kan_param_count(std::span<const std::size_t> shape,
                            const SplineSpec& spec) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
    total += shape[l] * shape[l + 1] * (spec.basis_count() + 2);
  }
  return total;
}

KanNetwork::KanNetwork(std::vector<std::size_t> shape, const SplineSpec& spec,
                       std::uint64_t seed)
    : shape_((validate_shape(shape), std::move(shape))),
      grid_(spec),
      seed_(seed),
      id_(next_network_id()) {
  const std::size_t m = grid_.basis_count();
  const std::size_t per_edge = m + 2;
  offsets_.resize(num_layers() + 1, 0);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    offsets_[l + 1] = offsets_[l] + shape_[l] * shape_[l + 1] * per_edge;
  }
  params_.resize(offsets_.back());

  std::mt19937_64 rng(seed_);
  std::normal_distribution<double> coeff_dist(0.0, 0.1 / std::sqrt(static_cast<double>(m)));
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(shape_[l] + shape_[l + 1]));
    std::uniform_real_distribution<double> base_dist(-bound, bound);
    for (std::size_t e = 0; e < shape_[l] * shape_[l + 1]; ++e) {
      double* p = params_.data() + offsets_[l] + e * per_edge;
      for (std::size_t c = 0; c < m; ++c) p[c] = coeff_dist(rng);
      p[m] = base_dist(rng);
      p[m + 1] = 1.0;
    }
  }
}

KanNetwork::KanNetwork(const KanNetwork& other)
    : shape_(other.shape_),
      grid_(other.grid_),
      seed_(other.seed_),
      offsets_(other.offsets_),
      params_(other.params_),
      id_(next_network_id()) {}

KanNetwork& KanNetwork::operator=(const KanNetwork& other) {
  if (this != &other) {
    shape_ = other.shape_;
    grid_ = other.grid_;
    seed_ = other.seed_;
    offsets_ = other.offsets_;
    params_ = other.params_;
    id_ = next_network_id();
    version_ = 0;
  }
  return *this;
}

std::span<double> KanNetwork::mutable_parameters() {
  ++version_;
  return params_;
}

std::size_t KanNetwork::edge_offset(std::size_t layer, std::size_t in,
                                    std::size_t out) const {
  if (layer >= num_layers() || in >= shape_[layer] || out >= shape_[layer + 1]) {
    throw ValidationError("edge index out of range");
  }
  return offsets_[layer] + (in * shape_[layer + 1] + out) * params_per_edge();
}

ConstEdgeRef KanNetwork::edge(std::size_t layer, std::size_t in,
                              std::size_t out) const {
  const std::size_t off = edge_offset(layer, in, out);
  const std::size_t m = grid_.basis_count();
  return {std::span<const double>(params_.data() + off, m), params_[off + m],
          params_[off + m + 1]};
}

EdgeRef KanNetwork::edge(std::size_t layer, std::size_t in, std::size_t out) {
  const std::size_t off = edge_offset(layer, in, out);
  const std::size_t m = grid_.basis_count();
  ++version_;
  return {std::span<double>(params_.data() + off, m), params_[off + m],
          params_[off + m + 1]};
}

double KanNetwork::edge_value(std::size_t layer, std::size_t in,
                              std::size_t out, double x) const {
  const ConstEdgeRef e = edge(layer, in, out);
  return e.base_weight * silu(x) +
         e.spline_scale * eval_spline(grid_, grid_.degree(), e.coeffs, x);
}

Matrix KanNetwork::folded_weights(std::size_t layer) const {
  const std::size_t n_in = shape_[layer];
  const std::size_t n_out = shape_[layer + 1];
  const std::size_t m = grid_.basis_count();
  Matrix w(n_in * (m + 1), n_out);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t j = 0; j < n_out; ++j) {
      const double* p = params_.data() + offsets_[layer] + (i * n_out + j) * (m + 2);
      const double scale = p[m + 1];
      w(i * (m + 1), j) = p[m];
      for (std::size_t c = 0; c < m; ++c) w(i * (m + 1) + 1 + c, j) = scale * p[c];
    }
  }
  return w;
}

void KanNetwork::expand_features(std::size_t layer, const Matrix& x,
                                 Matrix& features, Matrix* derivs) const {
  const std::size_t n_in = shape_[layer];
  const std::size_t m = grid_.basis_count();
  const int k = grid_.degree();
  const long rows = x.rows();
  features.setZero(rows, static_cast<long>(n_in * (m + 1)));
  if (derivs) derivs->setZero(rows, features.cols());
  double vals[32];
  double ders[32];
  std::span<double> der_span = derivs ? std::span<double>(ders, 32) : std::span<double>();
  for (long b = 0; b < rows; ++b) {
    double* f = features.row(b).data();
    double* d = derivs ? derivs->row(b).data() : nullptr;
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = x(b, static_cast<long>(i));
      if (!std::isfinite(xi)) {
        throw NumericOverflowError(
            layer, "non-finite input to KAN layer " + std::to_string(layer));
      }
      const std::size_t base = i * (m + 1);
      const double s = sigmoid(xi);
      f[base] = xi * s;
      if (d) d[base] = s * (1.0 + xi * (1.0 - s));
      const long first = grid_.eval_local(xi, std::span<double>(vals, 32), der_span);
      if (first == KnotGrid::kNoSupport) continue;
      for (int r = 0; r <= k; ++r) {
        const long idx = first + r;
        if (idx < 0 || idx >= static_cast<long>(m)) continue;
        f[base + 1 + idx] = vals[r];
        if (d) d[base + 1 + idx] = ders[r];
      }
    }
  }
}

Matrix KanNetwork::forward_layer(std::size_t layer, const Matrix& x) const {
  if (layer >= num_layers()) throw ValidationError("layer index out of range");
  if (static_cast<std::size_t>(x.cols()) != shape_[layer]) {
    throw ValidationError("layer " + std::to_string(layer) + " expects width " +
                          std::to_string(shape_[layer]) + ", got " +
                          std::to_string(x.cols()));
  }
  Matrix features;
  expand_features(layer, x, features, nullptr);
  Matrix y = features * folded_weights(layer);
  if (!y.allFinite()) {
    throw NumericOverflowError(
        layer, "non-finite output from KAN layer " + std::to_string(layer));
  }
  return y;
}

Matrix KanNetwork::forward(const Matrix& x, Trace* trace) const {
  if (static_cast<std::size_t>(x.cols()) != input_width()) {
    throw ValidationError("KAN expects input width " +
                          std::to_string(input_width()) + ", got " +
                          std::to_string(x.cols()));
  }
  if (!trace) {
    Matrix h = x;
    for (std::size_t l = 0; l < num_layers(); ++l) h = forward_layer(l, h);
    return h;
  }
  trace->stamp = stamp();
  trace->features.assign(num_layers(), Matrix());
  trace->feature_derivs.assign(num_layers(), Matrix());
  trace->weights.assign(num_layers(), Matrix());
  Matrix h = x;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    expand_features(l, h, trace->features[l], &trace->feature_derivs[l]);
    trace->weights[l] = folded_weights(l);
    h = trace->features[l] * trace->weights[l];
    if (!h.allFinite()) {
      throw NumericOverflowError(
          l, "non-finite output from KAN layer " + std::to_string(l));
    }
  }
  return h;
}

std::vector<double> KanNetwork::forward(std::span<const double> x,
                                        Trace* trace) const {
  if (x.size() != input_width()) {
    throw ValidationError("KAN expects input width " +
                          std::to_string(input_width()) + ", got " +
                          std::to_string(x.size()));
  }
  Matrix row(1, static_cast<long>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<long>(i)) = x[i];
  const Matrix y = forward(row, trace);
  return std::vector<double>(y.data(), y.data() + y.size());
}

Gradients KanNetwork::backward(const Trace& trace, const Matrix& output_grad,
                               bool want_input_grad) const {
  if (!(trace.stamp == stamp()) || trace.features.size() != num_layers()) {
    throw ContractError("KAN trace does not belong to this parameter state");
  }
  const long rows = trace.features.front().rows();
  if (output_grad.rows() != rows ||
      static_cast<std::size_t>(output_grad.cols()) != output_width()) {
    throw ContractError("output gradient shape does not match the trace");
  }

  const std::size_t m = grid_.basis_count();
  Gradients grads;
  grads.params.assign(params_.size(), 0.0);
  Matrix upstream = output_grad;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const std::size_t n_in = shape_[l];
    const std::size_t n_out = shape_[l + 1];
    const Matrix& features = trace.features[l];
    const Matrix folded_grad = features.transpose() * upstream;
    for (std::size_t i = 0; i < n_in; ++i) {
      for (std::size_t j = 0; j < n_out; ++j) {
        const std::size_t off = offsets_[l] + (i * n_out + j) * (m + 2);
        const double* p = params_.data() + off;
        double* g = grads.params.data() + off;
        const long row = static_cast<long>(i * (m + 1));
        const long col = static_cast<long>(j);
        g[m] = folded_grad(row, col);
        double scale_grad = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
          const double fg = folded_grad(row + 1 + static_cast<long>(c), col);
          g[c] = p[m + 1] * fg;
          scale_grad += p[c] * fg;
        }
        g[m + 1] = scale_grad;
      }
    }
    if (l == 0 && !want_input_grad) break;

    const Matrix feature_grad = upstream * trace.weights[l].transpose();
    const Matrix& derivs = trace.feature_derivs[l];
    Matrix input_grad(rows, static_cast<long>(n_in));
    for (long b = 0; b < rows; ++b) {
      const double* fg = feature_grad.row(b).data();
      const double* d = derivs.row(b).data();
      for (std::size_t i = 0; i < n_in; ++i) {
        double acc = 0.0;
        for (std::size_t f = i * (m + 1); f < (i + 1) * (m + 1); ++f) {
          acc += fg[f] * d[f];
        }
        input_grad(b, static_cast<long>(i)) = acc;
      }
    }
    upstream = std::move(input_grad);
  }
  if (want_input_grad) grads.input = std::move(upstream);
  return grads;
}

KanNetwork new_kan(std::vector<std::size_t> shape, const SplineSpec& spec,
                   std::uint64_t seed) {
  return KanNetwork(std::move(shape), spec, seed);
}

}  // namespace kants
