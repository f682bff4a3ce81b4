#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pressure_id/dataset.hpp"
#include "pressure_id/experiment.hpp"

namespace pressure_id::cli {

/// A synthetic preset ("chr-syn", "bed-syn") or a PRSD file.
struct DatasetSource {
  std::string preset;
  std::filesystem::path path;
  std::uint64_t seed = 42;

  static DatasetSource parse(std::string_view text, std::uint64_t seed);
  std::string describe() const;
  Dataset load() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Method method = Method::ours;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  DatasetSource target{"chr-syn", {}, 42};
  DatasetSource auxiliary{"bed-syn", {}, 42};
  MPnSSpec split{};
  TrainConfig train{};
  MethodOptions options{};

  void validate() const;
  bool needs_auxiliary() const { return method == Method::ours || method == Method::trans; }
};

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// "1,2,5" -> {1, 2, 5}
std::vector<int> parse_int_list(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// $PRESSURE_ID_OUT, or "out" when unset.
std::filesystem::path default_output_root();

}  // namespace pressure_id::cli
