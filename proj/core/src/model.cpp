#include "pressure_id/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pressure_id/errors.hpp"
#include "pressure_id/rng.hpp"

namespace pressure_id {
namespace {

constexpr std::size_t kInferenceChunk = 256;

enum Stream : std::uint64_t {
  kTargetEncoder = 10,
  kAuxiliaryEncoder = 11,
  kTargetDecoder = 12,
  kAuxiliaryDecoder = 13,
  kTargetHead = 14,
  kAuxiliaryHead = 15,
};

void add_stage(Sequential& net, int in, int out, int blocks, int stride, std::mt19937_64& rng) {
  net.add<ResidualBlock>(in, out, stride, rng);
  for (int b = 1; b < blocks; ++b) net.add<ResidualBlock>(out, out, 1, rng);
}

template <typename Frames>
RowMatrix encode_frames(const BranchModel& model, const Frames& frames) {
  RowMatrix out(static_cast<Eigen::Index>(frames.size()), model.config().encoder.embedding_dim);
  for (std::size_t start = 0; start < frames.size(); start += kInferenceChunk) {
    const std::size_t count = std::min(kInferenceChunk, frames.size() - start);
    const Tensor x = frames_to_tensor(frames.subspan(start, count), model.config().input_scale);
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(count)) = model.encode(x);
  }
  return out;
}

}  // namespace

std::string_view to_string(EncoderVariant variant) {
  switch (variant) {
    case EncoderVariant::tiny: return "tiny";
    case EncoderVariant::small: return "small";
    case EncoderVariant::medium: return "medium";
    case EncoderVariant::large: return "large";
  }
  return "unknown";
}

std::string_view to_string(DecoderSharing sharing) {
  return sharing == DecoderSharing::shared ? "shared" : "independent";
}

EncoderVariant encoder_variant_from_string(std::string_view name) {
  if (name == "tiny") return EncoderVariant::tiny;
  if (name == "small") return EncoderVariant::small;
  if (name == "medium") return EncoderVariant::medium;
  if (name == "large") return EncoderVariant::large;
  throw ValidationError("unknown encoder variant '" + std::string(name) + "'");
}

DecoderSharing decoder_sharing_from_string(std::string_view name) {
  if (name == "shared") return DecoderSharing::shared;
  if (name == "independent") return DecoderSharing::independent;
  throw ValidationError("unknown decoder sharing '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  require(encoder.embedding_dim >= 8, "embedding_dim must be >= 8");
  require(class_count >= 2, "class_count must be >= 2");
  require(std::isfinite(input_scale) && input_scale > 0.0, "input_scale must be positive");
}

Sequential build_encoder(const EncoderConfig& config, std::mt19937_64& rng) {
  Sequential net;
  const int d = config.embedding_dim;
  switch (config.variant) {
    case EncoderVariant::tiny:
      // 56x40 -> 28x20 -> 14x10 -> pooled 7x5
      net.add<Conv2d>(1, 8, 3, 2, 1, rng);
      net.add<Relu>();
      net.add<Conv2d>(8, 16, 3, 2, 1, rng);
      net.add<Relu>();
      net.add<AvgPool2>();
      net.add<Linear>(16 * 7 * 5, d, rng);
      return net;
    case EncoderVariant::small:
      net.add<Conv2d>(1, 16, 3, 2, 1, rng);
      net.add<Relu>();
      add_stage(net, 16, 16, 1, 1, rng);
      add_stage(net, 16, 32, 1, 2, rng);
      add_stage(net, 32, 64, 1, 2, rng);
      net.add<GlobalAvgPool>();
      net.add<Linear>(64, d, rng);
      return net;
    case EncoderVariant::medium:
      net.add<Conv2d>(1, 16, 3, 2, 1, rng);
      net.add<Relu>();
      add_stage(net, 16, 16, 2, 1, rng);
      add_stage(net, 16, 32, 2, 2, rng);
      add_stage(net, 32, 64, 2, 2, rng);
      net.add<GlobalAvgPool>();
      net.add<Linear>(64, d, rng);
      return net;
    case EncoderVariant::large:
      net.add<Conv2d>(1, 16, 3, 2, 1, rng);
      net.add<Relu>();
      add_stage(net, 16, 16, 3, 1, rng);
      add_stage(net, 16, 32, 4, 2, rng);
      add_stage(net, 32, 64, 6, 2, rng);
      add_stage(net, 64, 128, 3, 2, rng);
      net.add<GlobalAvgPool>();
      net.add<Linear>(128, d, rng);
      return net;
  }
  throw ValidationError("unknown encoder variant");
}

Sequential build_decoder(int embedding_dim, int class_count, std::mt19937_64& rng) {
  Sequential net;
  net.add<Linear>(embedding_dim, class_count, rng);
  return net;
}

Sequential build_projection_head(int embedding_dim, std::mt19937_64& rng) {
  Sequential net;
  net.add<Linear>(embedding_dim, embedding_dim, rng, std::sqrt(2.0));
  net.add<Relu>();
  net.add<Linear>(embedding_dim, embedding_dim, rng);
  return net;
}

BranchModel::BranchModel(ModelConfig config, std::shared_ptr<Sequential> encoder,
                         std::shared_ptr<Sequential> decoder, std::shared_ptr<Sequential> head)
    : config_(std::move(config)), encoder_(std::move(encoder)), decoder_(std::move(decoder)), head_(std::move(head)) {
  require(encoder_ && decoder_, "branch model needs an encoder and a decoder");
}

RowMatrix BranchModel::encode(std::span<const PressureFrame> frames) const { return encode_frames(*this, frames); }

RowMatrix BranchModel::encode(std::span<const PressureFrame* const> frames) const {
  return encode_frames(*this, frames);
}

RowMatrix BranchModel::encode(const Tensor& batch) const {
  require(batch.c() == 1 && batch.h() == kFrameRows && batch.w() == kFrameCols,
          "encoder input must be (N, 1, 56, 40), got (" + std::to_string(batch.n()) + ", " +
              std::to_string(batch.c()) + ", " + std::to_string(batch.h()) + ", " + std::to_string(batch.w()) + ")");
  const Tensor z = encoder_->forward(batch, nullptr);
  return z.matrix();
}

RowMatrix BranchModel::decode(const RowMatrix& embeddings) const {
  require(embeddings.cols() == config_.encoder.embedding_dim,
          "decoder expects embeddings of width " + std::to_string(config_.encoder.embedding_dim) + ", got " +
              std::to_string(embeddings.cols()));
  return decoder_->forward(Tensor::from_matrix(embeddings), nullptr).matrix();
}

RowMatrix BranchModel::project(const RowMatrix& embeddings) const {
  if (!head_) return embeddings;
  return head_->forward(Tensor::from_matrix(embeddings), nullptr).matrix();
}

std::vector<Parameter*> BranchModel::parameters() {
  auto out = encoder_->parameters();
  if (head_) head_->collect_parameters(out);
  decoder_->collect_parameters(out);
  return out;
}

std::size_t BranchModel::parameter_count() const {
  auto* self = const_cast<BranchModel*>(this);
  std::size_t total = 0;
  for (const auto* p : self->parameters()) total += p->value.size();
  return total;
}

BranchModel BranchModel::clone() const {
  return BranchModel(config_, std::make_shared<Sequential>(*encoder_), std::make_shared<Sequential>(*decoder_),
                     head_ ? std::make_shared<Sequential>(*head_) : nullptr);
}

BranchPair BranchPair::clone() const {
  BranchPair out{target.clone(), auxiliary.clone()};
  if (decoder_shared()) out.auxiliary.set_decoder(out.target.decoder_ptr());
  return out;
}

BranchPair init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const int d = config.encoder.embedding_dim;
  auto enc_t = make_rng(seed, kTargetEncoder);
  auto enc_a = make_rng(seed, kAuxiliaryEncoder);
  auto dec_t = make_rng(seed, kTargetDecoder);
  auto dec_a = make_rng(seed, kAuxiliaryDecoder);

  auto target_decoder = std::make_shared<Sequential>(build_decoder(d, config.class_count, dec_t));
  auto aux_decoder = config.decoder_sharing == DecoderSharing::shared
                         ? target_decoder
                         : std::make_shared<Sequential>(build_decoder(d, config.class_count, dec_a));
  std::shared_ptr<Sequential> head_t, head_a;
  if (config.projection_head) {
    auto rt = make_rng(seed, kTargetHead);
    auto ra = make_rng(seed, kAuxiliaryHead);
    head_t = std::make_shared<Sequential>(build_projection_head(d, rt));
    head_a = std::make_shared<Sequential>(build_projection_head(d, ra));
  }
  return BranchPair{
      BranchModel(config, std::make_shared<Sequential>(build_encoder(config.encoder, enc_t)), target_decoder, head_t),
      BranchModel(config, std::make_shared<Sequential>(build_encoder(config.encoder, enc_a)), aux_decoder, head_a)};
}

ContrastProjection project_for_contrast(const RowMatrix& embeddings) {
  ContrastProjection out;
  out.unit = embeddings;
  out.norms = embeddings.rowwise().norm();
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    const double n = out.norms(i);
    if (n > 0.0) {
      out.unit.row(i) /= n;
    } else {
      out.unit.row(i).setZero();
      ++out.zero_rows;
    }
  }
  return out;
}

RowMatrix project_for_contrast_backward(const ContrastProjection& projection, const RowMatrix& grad_unit) {
  RowMatrix grad = RowMatrix::Zero(grad_unit.rows(), grad_unit.cols());
  for (Eigen::Index i = 0; i < grad_unit.rows(); ++i) {
    const double n = projection.norms(i);
    if (!(n > 0.0)) continue;
    const auto u = projection.unit.row(i);
    const double along = u.dot(grad_unit.row(i));
    grad.row(i) = (grad_unit.row(i) - along * u) / n;
  }
  return grad;
}

}  // namespace pressure_id
