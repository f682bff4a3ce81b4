#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pressure_id/augment.hpp"
#include "pressure_id/dataset.hpp"
#include "pressure_id/losses.hpp"
#include "pressure_id/model.hpp"

namespace pressure_id {

struct TrainConfig {
  double temperature = 0.10;
  LossWeights weights{};
  double learning_rate = 5e-4;
  int epochs = 150;
  int batch_size = 32;
  ModelConfig model{};
  AugmentConfig augment{};
  /// When false, batches are used as-is (not doubled).
  bool augment_enabled = true;
  /// Blocks the contrastive gradient from reaching the auxiliary branch.
  bool stop_gradient_auxiliary = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lce1 = 0.0;
  double lce2 = 0.0;
  double lcon = 0.0;
  double total = 0.0;
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// 1-based epoch of the selected checkpoint; 0 when no epoch ran.
  int best_epoch = 0;
  double best_val_acc = std::numeric_limits<double>::quiet_NaN();

  /// Header "epoch,lce1,lce2,lcon,total,val_acc", values at full precision.
  std::string to_csv() const;
};

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

struct StepLosses {
  double ce_target = 0.0;
  double ce_auxiliary = 0.0;
  double contrastive = 0.0;
  /// NaN when any active term is non-finite.
  double total = 0.0;
};

/// One evaluation of the combined objective on already-assembled batches
/// (augmented views included). `auxiliary`/`aux_x` may be null for
/// single-branch training, in which case the contrastive term runs over the
/// target rows alone. With `accumulate_gradients` the gradients of the total
/// are added to the parameters' grad buffers.
StepLosses dual_branch_step(BranchModel& target, BranchModel* auxiliary, const Tensor& target_x,
                            std::span<const int> target_y, const Tensor* aux_x, std::span<const int> aux_y,
                            const TrainConfig& config, bool accumulate_gradients);

struct TrainResult {
  /// The checkpoint with the highest target validation accuracy.
  BranchPair models;
  TrainHistory history;
};

/// Dual-branch training. Each step pairs N auxiliary samples (one shuffled pass
/// per epoch, ceil(|aux| / N) steps) with N target samples drawn with
/// replacement, doubles both with augmentation, and minimises the weighted sum
/// of both cross-entropies and the contrastive term. Without an auxiliary set
/// the epoch length is ceil(|train| / N) and only the target branch is updated.
TrainResult train(const DataView& target_train, const DataView& target_val, const DataView* auxiliary,
                  const TrainConfig& config, std::optional<BranchPair> initial = std::nullopt);

/// Index of the largest logit per row; ties go to the lowest index.
std::vector<int> argmax_rows(const RowMatrix& logits);

std::vector<int> predict(const BranchModel& model, std::span<const PressureFrame> frames);
std::vector<int> predict(const BranchModel& model, const DataView& data);
double accuracy(const BranchModel& model, const DataView& data);

namespace detail {

/// Training loop shared by `train` and the pretraining stages of the baselines.
/// An empty `val` disables checkpoint selection (the last epoch is returned and
/// val_acc is NaN).
TrainResult train_loop(const DataView& target_train, const DataView& val, const DataView* auxiliary,
                       const TrainConfig& config, BranchPair models);

}  // namespace detail

}  // namespace pressure_id
