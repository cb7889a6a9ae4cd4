#include "nullforge/network_json.hpp"

namespace nullforge {

nlohmann::json network_to_json(const MlpNetwork& net) {
  nlohmann::json j;
  j["activation"] = net.activation().name();
  j["layer_dims"] = net.layer_dims();
  nlohmann::json w = nlohmann::json::array(), b = nlohmann::json::array();
  for (int i = 0; i < net.depth(); ++i) {
    w.push_back(net.weights(i));
    b.push_back(net.biases(i));
  }
  j["weights"] = std::move(w);
  j["biases"] = std::move(b);
  return j;
}

MlpNetwork network_from_json(const nlohmann::json& j) {
  const Activation act = Activation::from_name(j.at("activation").get<std::string>());
  auto dims = j.at("layer_dims").get<std::vector<int>>();
  auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
  auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
  return MlpNetwork(act, std::move(dims), std::move(weights), std::move(biases));
}

std::string network_to_string(const MlpNetwork& net) { return network_to_json(net).dump(); }

MlpNetwork network_from_string(const std::string& s) {
  return network_from_json(nlohmann::json::parse(s));
}

}  // namespace nullforge
