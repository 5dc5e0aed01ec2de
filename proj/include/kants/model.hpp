#pragma once

#include <concepts>
#include <span>
#include <string>
#include <variant>

#include "kants/kan.hpp"
#include "kants/mlp.hpp"

namespace kants {

/// What the trainer and evaluator need from a network family.
template <class N>
concept Network = requires(N& net, const N& cnet, const Matrix& x,
                           typename N::Trace& trace) {
  { cnet.forward(x, &trace) } -> std::same_as<Matrix>;
  { cnet.backward(trace, x) } -> std::same_as<Gradients>;
  { net.mutable_parameters() } -> std::same_as<std::span<double>>;
  { cnet.parameters() } -> std::same_as<std::span<const double>>;
  { cnet.input_width() } -> std::convertible_to<std::size_t>;
  { cnet.output_width() } -> std::convertible_to<std::size_t>;
  { cnet.param_count() } -> std::convertible_to<std::size_t>;
};

using Model = std::variant<KanNetwork, MlpNetwork>;

inline std::string model_family(const Model& m) {
  return std::holds_alternative<KanNetwork>(m) ? "kan" : "mlp";
}

inline std::size_t param_count(const Model& m) {
  return std::visit([](const auto& net) { return net.param_count(); }, m);
}

inline std::size_t param_count(const KanNetwork& net) { return net.param_count(); }
inline std::size_t param_count(const MlpNetwork& net) { return net.param_count(); }

inline Matrix predict(const Model& m, const Matrix& x) {
  return std::visit([&](const auto& net) { return net.forward(x); }, m);
}

}  // namespace kants
