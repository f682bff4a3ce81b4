#include "pressure_id/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pressure_id/errors.hpp"
#include "pressure_id/optimizer.hpp"
#include "pressure_id/rng.hpp"

namespace pressure_id {
namespace {

enum Stream : std::uint64_t {
  kReconDecoder = 20,
  kReconSampling = 21,
  kTransHead = 22,
  kTransPretrain = 23,
};

int class_count_of(const DataView& view) {
  int classes = 0;
  for (std::size_t i = 0; i < view.size(); ++i) classes = std::max(classes, view[i].subject_id + 1);
  return classes;
}

double accuracy_of(std::span<const int> predicted, const DataView& truth) {
  require(!truth.empty(), "accuracy: empty data");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i].subject_id ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

TrainConfig single_branch(TrainConfig config, bool augment) {
  config.weights = {config.weights.target_ce, 0.0, 0.0};
  config.augment_enabled = augment;
  return config;
}

BaselineResult finish(TrainResult trained, const DataView& test) {
  BaselineResult out{std::move(trained.models.target), std::move(trained.history), 0.0};
  out.accuracy = accuracy(out.model, test);
  return out;
}

}  // namespace

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::knn: return "knn";
    case BaselineKind::nil: return "nil";
    case BaselineKind::aug: return "aug";
    case BaselineKind::recon: return "recon";
    case BaselineKind::trans: return "trans";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(std::string_view name) {
  for (auto k : {BaselineKind::knn, BaselineKind::nil, BaselineKind::aug, BaselineKind::recon, BaselineKind::trans})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown baseline '" + std::string(name) + "'");
}

void BaselineSpec::validate() const {
  require(k >= 1 && k % 2 == 1, "knn k must be a positive odd number");
  require(pretrain_epochs >= 0, "pretrain_epochs must be >= 0");
}

// --- KNN -------------------------------------------------------------------------

int knn_classify(const DataView& train, std::span<const float> query, int k) {
  require(k >= 1, "knn k must be >= 1");
  require(static_cast<std::size_t>(k) <= train.size(), "knn k exceeds the training set size");
  require(query.size() == kFrameCells, "knn query must have 2240 values");

  std::vector<std::pair<double, std::size_t>> dist(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) {
    const auto& v = train[t].frame.values();
    double s = 0.0;
    for (std::size_t j = 0; j < kFrameCells; ++j) {
      const double d = static_cast<double>(v[j]) - static_cast<double>(query[j]);
      s += d * d;
    }
    dist[t] = {std::sqrt(s), t};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  const int classes = class_count_of(train);
  std::vector<int> votes(static_cast<std::size_t>(classes), 0);
  std::vector<double> dist_sum(static_cast<std::size_t>(classes), 0.0);
  for (int i = 0; i < k; ++i) {
    const int label = train[dist[static_cast<std::size_t>(i)].second].subject_id;
    ++votes[static_cast<std::size_t>(label)];
    dist_sum[static_cast<std::size_t>(label)] += dist[static_cast<std::size_t>(i)].first;
  }
  int best = -1;
  for (int c = 0; c < classes; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    if (votes[uc] == 0) continue;
    if (best < 0) {
      best = c;
      continue;
    }
    const auto ub = static_cast<std::size_t>(best);
    if (votes[uc] > votes[ub]) {
      best = c;
    } else if (votes[uc] == votes[ub] && dist_sum[uc] / votes[uc] < dist_sum[ub] / votes[ub]) {
      best = c;
    }
  }
  return best;
}

KnnResult run_knn(const DataView& train, const DataView& test, int k) {
  require(!test.empty(), "knn: empty test set");
  KnnResult out;
  out.predictions.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) out.predictions.push_back(knn_classify(train, test[i].frame.values(), k));
  out.accuracy = accuracy_of(out.predictions, test);
  return out;
}

// --- Nil / Aug ---------------------------------------------------------------------

BaselineResult run_nil(const DataView& train, const DataView& val, const DataView& test, TrainConfig config) {
  return finish(pressure_id::train(train, val, nullptr, single_branch(std::move(config), false)), test);
}

BaselineResult run_aug(const DataView& train, const DataView& val, const DataView& test, TrainConfig config) {
  return finish(pressure_id::train(train, val, nullptr, single_branch(std::move(config), true)), test);
}

// --- Recon ----------------------------------------------------------------------

Sequential build_reconstruction_decoder(int embedding_dim, std::mt19937_64& rng) {
  Sequential net;
  net.add<Linear>(embedding_dim, 16 * 7 * 5, rng);
  net.add<Relu>();
  net.add<Unflatten>(16, 7, 5);
  net.add<Upsample2>();
  net.add<Conv2d>(16, 16, 3, 1, 1, rng);
  net.add<Relu>();
  net.add<Upsample2>();
  net.add<Conv2d>(16, 8, 3, 1, 1, rng);
  net.add<Relu>();
  net.add<Upsample2>();
  net.add<Conv2d>(8, 1, 3, 1, 1, rng);
  return net;
}

AutoencoderPretraining pretrain_autoencoder(Sequential& encoder, const DataView& data, const TrainConfig& config,
                                            int epochs) {
  require(epochs >= 0, "pretrain epochs must be >= 0");
  require(epochs == 0 || !data.empty(), "autoencoder pretraining data is empty");
  auto init_rng = make_rng(config.seed, kReconDecoder);
  AutoencoderPretraining out{build_reconstruction_decoder(config.model.encoder.embedding_dim, init_rng), {}};
  if (epochs == 0) return out;

  std::vector<Parameter*> params = encoder.parameters();
  const auto dec_params = out.decoder.parameters();
  params.insert(params.end(), dec_params.begin(), dec_params.end());
  Adam optimizer(params, config.learning_rate);

  auto sampling = make_rng(config.seed, kReconSampling);
  const std::size_t n = static_cast<std::size_t>(config.batch_size);
  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), sampling);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += n) {
      const std::size_t count = std::min(n, order.size() - begin);
      std::vector<const PressureFrame*> frames(count);
      for (std::size_t i = 0; i < count; ++i) frames[i] = &data[order[begin + i]].frame;
      const Tensor x = frames_to_tensor(std::span<const PressureFrame* const>(frames), config.model.input_scale);

      LayerTape enc_tape, dec_tape;
      const Tensor z = encoder.forward(x, &enc_tape);
      const Tensor y = out.decoder.forward(z, &dec_tape);
      Tensor grad(y.n(), y.c(), y.h(), y.w());
      const double scale = 1.0 / static_cast<double>(y.size());
      double loss = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y.data()[i] - x.data()[i];
        loss += d * d;
        grad.data()[i] = 2.0 * d * scale;
      }
      loss *= scale;
      if (!std::isfinite(loss))
        throw TrainingError("non-finite reconstruction loss at pretraining epoch " + std::to_string(epoch + 1));

      optimizer.zero_grad();
      encoder.backward(out.decoder.backward(grad, dec_tape), enc_tape);
      optimizer.step();
      sum += loss;
      ++batches;
    }
    out.losses.push_back(sum / static_cast<double>(batches));
  }
  return out;
}

Tensor reconstruct(const Sequential& encoder, const Sequential& decoder, std::span<const PressureFrame> frames,
                   double input_scale) {
  return decoder.forward(encoder.forward(frames_to_tensor(frames, input_scale), nullptr), nullptr);
}

ReconResult run_recon(const DataView& train, const DataView& val, const DataView& test, TrainConfig config,
                      int pretrain_epochs) {
  config = single_branch(std::move(config), false);
  BranchPair models = init_model(config.model, config.seed);
  AutoencoderPretraining pre = pretrain_autoencoder(models.target.encoder(), train, config, pretrain_epochs);
  auto trained = pressure_id::train(train, val, nullptr, config, std::move(models));
  return {finish(std::move(trained), test), std::move(pre)};
}

// --- Trans ----------------------------------------------------------------------

TransResult run_trans(const DataView& train, const DataView& val, const DataView& test, const DataView& auxiliary,
                      TrainConfig config, int pretrain_epochs) {
  require(pretrain_epochs >= 0, "pretrain epochs must be >= 0");
  require(!auxiliary.empty(), "trans: auxiliary dataset is empty");
  config = single_branch(std::move(config), false);
  config.validate();
  BranchPair models = init_model(config.model, config.seed);

  TransResult out{{models.target.clone(), {}, 0.0}, 0.0};
  if (pretrain_epochs > 0) {
    TrainConfig pre = config;
    pre.epochs = pretrain_epochs;
    pre.seed = make_rng(config.seed, kTransPretrain)();
    models = detail::train_loop(auxiliary, DataView{}, nullptr, pre, std::move(models)).models;
  }
  out.pretrain_accuracy = accuracy(models.target, auxiliary);

  auto head_rng = make_rng(config.seed, kTransHead);
  models.target.set_decoder(std::make_shared<Sequential>(
      build_decoder(config.model.encoder.embedding_dim, config.model.class_count, head_rng)));

  if (config.epochs == 0) {
    out.baseline.model = std::move(models.target);
    out.baseline.accuracy = accuracy(out.baseline.model, test);
    return out;
  }
  out.baseline = finish(pressure_id::train(train, val, nullptr, config, std::move(models)), test);
  return out;
}

}  // namespace pressure_id
