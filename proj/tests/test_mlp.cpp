#include <doctest.h>

#include <random>

#include "gradcheck.hpp"
#include "kants/error.hpp"
#include "kants/mlp.hpp"

using namespace kants;

TEST_CASE("parameter counts of the MLP presets") {
  CHECK(new_mlp({168, 300, 300, 300, 24}, 0).param_count() == 238524);
  CHECK(new_mlp({168, 300, 300, 300, 300, 24}, 0).param_count() == 328824);
  CHECK(new_mlp({2, 1}, 0).param_count() == 3);
}

TEST_CASE("degenerate MLP shapes are rejected") {
  CHECK_THROWS_AS(new_mlp({4}, 0), ValidationError);
  CHECK_THROWS_AS(new_mlp({4, 0, 1}, 0), ValidationError);
}

TEST_CASE("initialization: bounded weights, zero biases, seeded") {
  MlpNetwork net = new_mlp({10, 20, 5}, 4);
  const double bound = std::sqrt(6.0 / 30.0);
  for (double w : net.weights(0)) CHECK(std::abs(w) <= bound);
  for (double b : net.biases(0)) CHECK(b == 0.0);
  for (double b : net.biases(1)) CHECK(b == 0.0);
  const MlpNetwork again = new_mlp({10, 20, 5}, 4);
  CHECK(std::equal(net.parameters().begin(), net.parameters().end(), again.parameters().begin()));
}

TEST_CASE("zero weights give zero output") {
  MlpNetwork net = new_mlp({4, 6, 3}, 1);
  for (double& p : net.mutable_parameters()) p = 0.0;
  const auto y = net.forward(std::vector<double>{1.0, -2.0, 3.0, 0.5});
  CHECK(y == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("hidden ReLU clips negative inputs") {
  MlpNetwork net = new_mlp({1, 1, 1}, 1);
  for (double& p : net.mutable_parameters()) p = 0.0;
  net.weights(0)[0] = 1.0;
  net.weights(1)[0] = 1.0;
  CHECK(net.forward(std::vector<double>{-2.0})[0] == 0.0);
  CHECK(net.forward(std::vector<double>{3.0})[0] == 3.0);
}

TEST_CASE("output layer is linear") {
  MlpNetwork net = new_mlp({1, 1}, 1);
  net.weights(0)[0] = 1.0;
  net.biases(0)[0] = -5.0;
  CHECK(net.forward(std::vector<double>{2.0})[0] == -3.0);
}

TEST_CASE("gradients of a random [4,6,3] net match finite differences") {
  std::mt19937_64 rng(31);
  MlpNetwork net = new_mlp({4, 6, 3}, 31);
  std::normal_distribution<double> n01;
  for (double& p : net.mutable_parameters()) p = 0.5 * n01(rng);
  const auto o = gradcheck::check_network(net, rng);
  CHECK(o.failed == 0);
  CHECK(o.checked == net.param_count() + 8);
}

TEST_CASE("ReLU subgradient at zero is zero") {
  MlpNetwork net = new_mlp({1, 1, 1}, 1);
  for (double& p : net.mutable_parameters()) p = 0.0;
  net.weights(0)[0] = 1.0;
  net.weights(1)[0] = 1.0;
  MlpTrace trace;
  net.forward(std::vector<double>{0.0}, &trace);
  const Gradients g = net.backward(trace, Matrix::Ones(1, 1), true);
  CHECK(g.params[0] == 0.0);  // first-layer weight
  CHECK(g.params[1] == 0.0);  // first-layer bias
  CHECK(g.input(0, 0) == 0.0);
}

TEST_CASE("stale traces are rejected") {
  MlpNetwork net = new_mlp({2, 3, 1}, 1);
  MlpTrace trace;
  net.forward(std::vector<double>{0.1, 0.2}, &trace);
  net.mutable_parameters()[0] = 0.5;
  CHECK_THROWS_AS(net.backward(trace, Matrix::Ones(1, 1)), ContractError);
}

TEST_CASE("property: bias-free ReLU net is positively homogeneous") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> alpha(0.1, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    MlpNetwork net = new_mlp({5, 7, 7, 3}, static_cast<std::uint64_t>(trial));
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      for (double& b : net.biases(l)) b = 0.0;
    }
    Matrix x(1, 5);
    for (long i = 0; i < 5; ++i) x(0, i) = u(rng);
    const double a = alpha(rng);
    const Matrix lhs = net.forward(Matrix(a * x));
    const Matrix rhs = a * net.forward(x);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("property: stored learnables match the count formula") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> width(1, 30);
  std::uniform_int_distribution<int> depth(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> shape(static_cast<std::size_t>(depth(rng)) + 1);
    for (auto& s : shape) s = width(rng);
    MlpNetwork net(shape, 0);
    std::size_t enumerated = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      enumerated += net.weights(l).size() + net.biases(l).size();
    }
    CHECK(enumerated == net.param_count());
    CHECK(enumerated == mlp_param_count(shape));
  }
}
