#pragma once

// Randomized finite-difference gradient checks shared by the unit and
// acceptance suites.

#include <random>
#include <string>
#include <vector>

#include "kants/kan.hpp"
#include "kants/mlp.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Outcome {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_rel = 0.0;
  std::string shape;
};

inline std::vector<std::size_t> random_shape(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> width(1, 8);
  std::uniform_int_distribution<int> layers(1, 2);
  std::vector<std::size_t> shape(static_cast<std::size_t>(layers(rng)) + 1);
  for (auto& s : shape) s = width(rng);
  return shape;
}

inline std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

/// Checks d/dtheta of sum(w .* net(x)) for every parameter and input.
template <class Net>
Outcome check_network(Net& net, std::mt19937_64& rng, double step = 1e-5) {
  const oracle::GradCheck rule{1e-4, 1e-7, 1e-6};
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  const long in = static_cast<long>(net.input_width());
  const long out = static_cast<long>(net.output_width());
  kants::Matrix x(2, in);
  kants::Matrix w(2, out);
  for (long i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  for (long i = 0; i < w.size(); ++i) w.data()[i] = u(rng);

  typename Net::Trace trace;
  net.forward(x, &trace);
  const kants::Gradients g = net.backward(trace, w, true);
  const auto objective = [&](const Net& n, const kants::Matrix& xx) {
    return n.forward(xx).cwiseProduct(w).sum();
  };

  Outcome result;
  const auto record = [&](double analytic, double numeric) {
    ++result.checked;
    if (!rule.ok(analytic, numeric)) ++result.failed;
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale >= 1e-6) result.worst_rel = std::max(result.worst_rel, std::abs(analytic - numeric) / scale);
  };

  Net probe = net;
  const std::vector<double> base(net.parameters().begin(), net.parameters().end());
  for (std::size_t p = 0; p < base.size(); ++p) {
    probe.mutable_parameters()[p] = base[p] + step;
    const double up = objective(probe, x);
    probe.mutable_parameters()[p] = base[p] - step;
    const double down = objective(probe, x);
    probe.mutable_parameters()[p] = base[p];
    record(g.params[p], (up - down) / (2.0 * step));
  }
  for (long i = 0; i < x.size(); ++i) {
    kants::Matrix xp = x;
    xp.data()[i] = x.data()[i] + step;
    const double up = objective(net, xp);
    xp.data()[i] = x.data()[i] - step;
    const double down = objective(net, xp);
    record(g.input.data()[i], (up - down) / (2.0 * step));
  }
  return result;
}

inline Outcome check_kan(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto shape = random_shape(rng);
  std::uniform_int_distribution<int> deg(1, 3);
  std::uniform_int_distribution<int> gsize(3, 10);
  kants::KanNetwork net(shape, {deg(rng), gsize(rng), -1.0, 1.0}, seed);
  std::normal_distribution<double> n01;
  for (double& p : net.mutable_parameters()) p = 0.5 * n01(rng);
  Outcome o = check_network(net, rng);
  o.shape = shape_string(shape);
  return o;
}

inline Outcome check_mlp(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto shape = random_shape(rng);
  kants::MlpNetwork net(shape, seed);
  std::normal_distribution<double> n01;
  for (double& p : net.mutable_parameters()) p = 0.5 * n01(rng);
  Outcome o = check_network(net, rng);
  o.shape = shape_string(shape);
  return o;
}

}  // namespace gradcheck
