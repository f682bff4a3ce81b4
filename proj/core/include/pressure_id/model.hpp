#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pressure_id/layers.hpp"
#include "pressure_id/tensor.hpp"

namespace pressure_id {

/// Depth tiers. `tiny` is two plain conv layers for fast tests; small/medium/large
/// are residual stacks of increasing depth (ResNet-18/34/50 analogues scaled to a
/// single-channel 56x40 input with a 3x3 stem).
enum class EncoderVariant { tiny, small, medium, large };
enum class DecoderSharing { independent, shared };

std::string_view to_string(EncoderVariant variant);
std::string_view to_string(DecoderSharing sharing);
EncoderVariant encoder_variant_from_string(std::string_view name);
DecoderSharing decoder_sharing_from_string(std::string_view name);

struct EncoderConfig {
  EncoderVariant variant = EncoderVariant::small;
  int embedding_dim = 128;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct ModelConfig {
  EncoderConfig encoder;
  DecoderSharing decoder_sharing = DecoderSharing::independent;
  int class_count = 8;
  /// Optional one-hidden-layer head applied before the contrastive normalisation.
  bool projection_head = false;
  /// Raw pressure values are multiplied by this before entering the encoder.
  double input_scale = 1.0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

Sequential build_encoder(const EncoderConfig& config, std::mt19937_64& rng);
Sequential build_decoder(int embedding_dim, int class_count, std::mt19937_64& rng);
Sequential build_projection_head(int embedding_dim, std::mt19937_64& rng);

/// Encoder F and classifier G for one device. The decoder (and head) are held
/// by shared_ptr so two branches can alias a single parameter set.
class BranchModel {
 public:
  BranchModel(ModelConfig config, std::shared_ptr<Sequential> encoder, std::shared_ptr<Sequential> decoder,
              std::shared_ptr<Sequential> head = nullptr);

  const ModelConfig& config() const { return config_; }

  /// Inference-mode embeddings, one row per frame.
  RowMatrix encode(std::span<const PressureFrame> frames) const;
  RowMatrix encode(std::span<const PressureFrame* const> frames) const;
  /// `batch` must be (N, 1, 56, 40) in scaled units.
  RowMatrix encode(const Tensor& batch) const;
  /// Unnormalised class scores, one row per embedding.
  RowMatrix decode(const RowMatrix& embeddings) const;
  /// Applies the projection head when present; identity otherwise.
  RowMatrix project(const RowMatrix& embeddings) const;

  Sequential& encoder() { return *encoder_; }
  const Sequential& encoder() const { return *encoder_; }
  Sequential& decoder() { return *decoder_; }
  const Sequential& decoder() const { return *decoder_; }
  Sequential* head() { return head_.get(); }
  const Sequential* head() const { return head_.get(); }
  const std::shared_ptr<Sequential>& decoder_ptr() const { return decoder_; }
  void set_decoder(std::shared_ptr<Sequential> decoder) { decoder_ = std::move(decoder); }

  /// Encoder, head and decoder parameters in a fixed order.
  std::vector<Parameter*> parameters();
  std::size_t parameter_count() const;

  /// Deep copy; the copy shares nothing with this model.
  BranchModel clone() const;

 private:
  ModelConfig config_;
  std::shared_ptr<Sequential> encoder_;
  std::shared_ptr<Sequential> decoder_;
  std::shared_ptr<Sequential> head_;
};

struct BranchPair {
  BranchModel target;
  BranchModel auxiliary;

  bool decoder_shared() const { return target.decoder_ptr() == auxiliary.decoder_ptr(); }
  /// Deep copy that keeps decoder aliasing when the pair shares a decoder.
  BranchPair clone() const;
};

/// Two branches with independently seeded encoders; decoders shared or
/// independent per config. Deterministic in (config, seed).
BranchPair init_model(const ModelConfig& config, std::uint64_t seed);

/// Unit-norm rows for the contrastive term. Rows with zero norm stay zero and
/// are counted in `zero_rows`.
struct ContrastProjection {
  RowMatrix unit;
  Eigen::VectorXd norms;
  int zero_rows = 0;
};

ContrastProjection project_for_contrast(const RowMatrix& embeddings);
/// Gradient with respect to the input embeddings given the gradient with
/// respect to the unit rows.
RowMatrix project_for_contrast_backward(const ContrastProjection& projection, const RowMatrix& grad_unit);

}  // namespace pressure_id
