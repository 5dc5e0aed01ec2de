#include "kants/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kants/error.hpp"

namespace kants {

namespace {

constexpr const char* kFormatTag = "kants-checkpoint";

template <class Net>
void load_params(Net& net, const nlohmann::json& j) {
  const auto values = j.at("parameters").get<std::vector<double>>();
  if (values.size() != net.param_count()) {
    throw ValidationError("checkpoint has " + std::to_string(values.size()) +
                          " parameters, shape implies " +
                          std::to_string(net.param_count()));
  }
  std::span<double> dst = net.mutable_parameters();
  std::copy(values.begin(), values.end(), dst.begin());
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json j;
  j["format"] = kFormatTag;
  j["version"] = kCheckpointVersion;
  j["family"] = model_family(ckpt.model);
  std::visit(
      [&](const auto& net) {
        j["shape"] = net.shape();
        j["seed"] = net.seed();
        j["parameters"] = std::vector<double>(net.parameters().begin(),
                                              net.parameters().end());
      },
      ckpt.model);
  if (const auto* kan = std::get_if<KanNetwork>(&ckpt.model)) {
    const SplineSpec& s = kan->spec();
    j["spline"] = {{"degree", s.degree},
                   {"intervals", s.intervals},
                   {"range", {s.range_lo, s.range_hi}}};
  }
  j["window"] = {{"context", ckpt.window.context},
                 {"prediction", ckpt.window.prediction}};
  nlohmann::json norm = nlohmann::json::array();
  for (const auto& r : ckpt.normalization) norm.push_back({r.min, r.max});
  j["normalization"] = norm;
  return j.dump();
}

Checkpoint parse_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormatTag) {
      throw ValidationError("not a kants checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    const std::string family = j.at("family").get<std::string>();
    ForecastWindowSpec window{j.at("window").at("context").get<std::size_t>(),
                              j.at("window").at("prediction").get<std::size_t>()};
    std::vector<NormalizationRecord> norm;
    for (const auto& r : j.at("normalization")) {
      norm.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    }
    if (family == "kan") {
      const auto& s = j.at("spline");
      SplineSpec spec{s.at("degree").get<int>(), s.at("intervals").get<int>(),
                      s.at("range").at(0).get<double>(),
                      s.at("range").at(1).get<double>()};
      KanNetwork net(shape, spec, seed);
      load_params(net, j);
      return Checkpoint{std::move(net), window, std::move(norm)};
    }
    if (family == "mlp") {
      MlpNetwork net(shape, seed);
      load_params(net, j);
      return Checkpoint{std::move(net), window, std::move(norm)};
    }
    throw ValidationError("unknown model family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_checkpoint(ckpt);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace kants
