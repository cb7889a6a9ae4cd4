#pragma once

#include <string>

#include <json.hpp>

#include "nullforge/network.hpp"

namespace nullforge {

// {activation, layer_dims, weights (row-major per layer), biases}.
// Round-trips are bit-exact for finite doubles.
nlohmann::json network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const nlohmann::json& j);

std::string network_to_string(const MlpNetwork& net);
MlpNetwork network_from_string(const std::string& s);

}  // namespace nullforge
