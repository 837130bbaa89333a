#pragma once

#include <filesystem>
#include <string>

#include "graphcal/gcn.hpp"

namespace graphcal {

inline constexpr int kCheckpointVersion = 1;

/// JSON container: format tag, version, seed, dims and every parameter
/// matrix row-major. Doubles round-trip exactly.
std::string model_to_json(const GcnModel& model);
GcnModel model_from_json(const std::string& text);

void save_model(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_model(const std::filesystem::path& path);

}  // namespace graphcal
