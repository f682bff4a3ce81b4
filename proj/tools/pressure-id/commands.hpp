#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "experiment_config.hpp"

namespace pressure_id::cli {

struct GenerateOptions {
  std::string preset = "chr-syn";
  std::uint64_t seed = 42;
  std::filesystem::path out_dir;
  std::optional<int> samples;
};

struct TrainOptions {
  std::filesystem::path out_root;
  /// Seeds run as parallel subprocesses when > 1.
  int jobs = 1;
  /// Children write their seed directory only; the parent aggregates.
  bool aggregate = true;
};

struct AblateOptions {
  std::filesystem::path out_root;
  std::vector<int> values;
  std::vector<EncoderVariant> encoders{EncoderVariant::small, EncoderVariant::medium, EncoderVariant::large};
  std::vector<DecoderSharing> decoders{DecoderSharing::independent, DecoderSharing::shared};
};

void cmd_generate(const GenerateOptions& options);
void cmd_split(const ExperimentConfig& config, std::uint64_t seed, const std::filesystem::path& out);
void cmd_train(const ExperimentConfig& config, const TrainOptions& options);
/// kind: postures, samples or encdec.
void cmd_ablate(const std::string& kind, const ExperimentConfig& config, const AblateOptions& options);
void cmd_report(const std::vector<std::filesystem::path>& run_dirs, const std::optional<std::filesystem::path>& out);

}  // namespace pressure_id::cli
