#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pressure_id/baselines.hpp"
#include "pressure_id/evaluation.hpp"
#include "pressure_id/split.hpp"
#include "pressure_id/trainer.hpp"

namespace pressure_id {

enum class Method { ours, nil, aug, recon, trans, knn };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct MethodOptions {
  int knn_k = 5;
  int pretrain_epochs = 50;
};

struct RunOutcome {
  RunReport report;
  SplitResult split;
  /// Empty for knn.
  TrainHistory history;
  /// Target-branch model; absent for knn.
  std::optional<BranchModel> model;
  /// Both branches for the full method.
  std::optional<BranchPair> models;
  /// Reconstruction curve (recon) or auxiliary accuracy after pretraining (trans).
  std::vector<double> pretrain_losses;
  double pretrain_accuracy = 0.0;
};

/// One complete run: split the target dataset with `seed`, train `method` with
/// `seed`, evaluate on the held-out test split. `auxiliary` is required for ours
/// and trans and ignored otherwise.
RunOutcome run_method(Method method, const Dataset& target, const Dataset* auxiliary, MPnSSpec spec,
                      TrainConfig config, std::uint64_t seed, const MethodOptions& options = {});

using ProgressFn = std::function<void(std::string_view)>;

struct CurvePoint {
  int value = 0;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
};

struct AblationCurve {
  /// "postures" or "samples".
  std::string parameter;
  std::vector<CurvePoint> points;

  /// Header "<parameter>,runs,mean,std,accuracies" (accuracies ';'-joined).
  std::string to_csv() const;
};

/// Mean accuracy against the number of training postures m (n fixed by `spec`).
AblationCurve ablate_postures(const Dataset& target, const Dataset* auxiliary, std::span<const int> m_values,
                              const MPnSSpec& spec, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                              Method method = Method::ours, const MethodOptions& options = {},
                              const ProgressFn& progress = {});

/// Mean accuracy against samples per posture n (m fixed by `spec`).
AblationCurve ablate_samples(const Dataset& target, const Dataset* auxiliary, std::span<const int> n_values,
                             const MPnSSpec& spec, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                             Method method = Method::ours, const MethodOptions& options = {},
                             const ProgressFn& progress = {});

struct EncoderDecoderCell {
  EncoderVariant variant = EncoderVariant::small;
  DecoderSharing sharing = DecoderSharing::independent;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Full method over every (variant, sharing) pair, variant-major.
std::vector<EncoderDecoderCell> ablate_encoder_decoder(const Dataset& target, const Dataset* auxiliary,
                                                       std::span<const EncoderVariant> variants,
                                                       std::span<const DecoderSharing> sharings,
                                                       const MPnSSpec& spec, const TrainConfig& config,
                                                       std::span<const std::uint64_t> seeds,
                                                       const ProgressFn& progress = {});

/// Header "encoder,decoder,runs,mean,std,accuracies".
std::string encoder_decoder_csv(std::span<const EncoderDecoderCell> cells);

}  // namespace pressure_id
