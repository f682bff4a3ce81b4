#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pressure_id/dataset.hpp"
#include "pressure_id/trainer.hpp"

namespace pressure_id {

enum class BaselineKind { knn, nil, aug, recon, trans };

std::string_view to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(std::string_view name);

struct BaselineSpec {
  BaselineKind kind = BaselineKind::nil;
  /// Neighbours for knn; must be odd.
  int k = 5;
  /// Autoencoder (recon) or auxiliary-classification (trans) pretraining epochs.
  int pretrain_epochs = 50;

  void validate() const;
};

// --- K-nearest neighbours on raw flattened frames --------------------------

struct KnnResult {
  std::vector<int> predictions;
  double accuracy = 0.0;
};

/// Majority vote among the k nearest training frames (Euclidean distance over
/// the 2240 raw values). Vote ties go to the class with the smaller mean
/// neighbour distance, then to the lower class id. Distance ties between
/// training samples go to the lower training position.
int knn_classify(const DataView& train, std::span<const float> query, int k);
KnnResult run_knn(const DataView& train, const DataView& test, int k);

// --- Single-branch neural baselines -------------------------------------------

struct BaselineResult {
  BranchModel model;
  TrainHistory history;
  double accuracy = 0.0;
};

/// Target data only, no augmentation, auxiliary and contrastive weights zero.
BaselineResult run_nil(const DataView& train, const DataView& val, const DataView& test, TrainConfig config);
/// As nil but every batch is doubled with augmented views.
BaselineResult run_aug(const DataView& train, const DataView& val, const DataView& test, TrainConfig config);

/// Decoder used for reconstruction pretraining: embedding -> 16x7x5 -> three
/// upsample+conv stages -> 1x56x40.
Sequential build_reconstruction_decoder(int embedding_dim, std::mt19937_64& rng);

struct AutoencoderPretraining {
  Sequential decoder;
  /// Mean squared reconstruction error per pretraining epoch.
  std::vector<double> losses;
};

/// Trains `encoder` in place as the front half of an autoencoder on `data`.
AutoencoderPretraining pretrain_autoencoder(Sequential& encoder, const DataView& data, const TrainConfig& config,
                                            int epochs);

/// Reconstructs frames with an encoder and a reconstruction decoder; output in
/// the model's scaled units, shape (N, 1, 56, 40).
Tensor reconstruct(const Sequential& encoder, const Sequential& decoder, std::span<const PressureFrame> frames,
                   double input_scale);

struct ReconResult {
  BaselineResult baseline;
  AutoencoderPretraining pretraining;
};

/// Autoencoder pretraining of the encoder on the target training frames, then a
/// fresh classifier and nil-style fine-tuning. With zero pretraining epochs this
/// is exactly run_nil.
ReconResult run_recon(const DataView& train, const DataView& val, const DataView& test, TrainConfig config,
                      int pretrain_epochs);

struct TransResult {
  BaselineResult baseline;
  /// Accuracy on the auxiliary training data after pretraining.
  double pretrain_accuracy = 0.0;
};

/// Pretrains encoder+classifier on the auxiliary data, swaps in a fresh
/// classifier and fine-tunes every parameter on the target split for
/// config.epochs epochs (0 skips fine-tuning).
TransResult run_trans(const DataView& train, const DataView& val, const DataView& test, const DataView& auxiliary,
                      TrainConfig config, int pretrain_epochs);

}  // namespace pressure_id
