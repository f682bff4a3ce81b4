#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pressure_id/model.hpp"

namespace pressure_id {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view text);

/// Single binary file ("PRCK", version, embedded JSON config, float64 parameters)
/// plus a JSON sidecar with the config next to it.
void save_checkpoint(const BranchModel& model, const std::filesystem::path& path);
BranchModel load_checkpoint(const std::filesystem::path& path);

}  // namespace pressure_id
