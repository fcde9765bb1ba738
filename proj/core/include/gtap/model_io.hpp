#pragma once

#include <filesystem>
#include <string>

#include "gtap/network.hpp"

namespace gtap {

// "GTAPNN01", one line of compact JSON {"dtype","layer_sizes","seed"}
// terminated by '\n', then little-endian float64 parameters layer by layer:
// the layer's weights (row-major), then its biases.
inline constexpr char kModelMagic[] = "GTAPNN01";

std::string serialize_model(const DenseNetwork& net);
DenseNetwork deserialize_model(const std::string& bytes);

void save_model(const DenseNetwork& net, const std::filesystem::path& path);
DenseNetwork load_model(const std::filesystem::path& path);

}  // namespace gtap
