#include "pressure_id/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pressure_id/errors.hpp"
#include "pressure_id/optimizer.hpp"
#include "pressure_id/rng.hpp"

namespace pressure_id {
namespace {

enum Stream : std::uint64_t {
  kTargetSampling = 1,
  kAuxiliarySampling = 2,
  kTargetAugment = 3,
  kAuxiliaryAugment = 4,
};

struct BranchForward {
  LayerTape encoder_tape;
  LayerTape decoder_tape;
  LayerTape head_tape;
  RowMatrix embeddings;
  RowMatrix projected;
  LossWithGrad ce;
};

BranchForward forward_branch(const BranchModel& model, const Tensor& x, std::span<const int> y, bool keep,
                             bool need_projection) {
  BranchForward f;
  const Tensor z = model.encoder().forward(x, keep ? &f.encoder_tape : nullptr);
  f.embeddings = z.matrix();
  const Tensor logits = model.decoder().forward(z, keep ? &f.decoder_tape : nullptr);
  f.ce = cross_entropy_with_grad(logits.matrix(), y);
  if (need_projection) {
    f.projected = model.head() ? model.head()->forward(z, keep ? &f.head_tape : nullptr).matrix() : f.embeddings;
  }
  return f;
}

// Pushes dL/dz (embedding gradient) and dL/dlogits back through one branch.
void backward_branch(BranchModel& model, BranchForward& f, double ce_weight, const RowMatrix* grad_projected) {
  RowMatrix grad_z = RowMatrix::Zero(f.embeddings.rows(), f.embeddings.cols());
  if (ce_weight > 0.0) {
    const Tensor g = model.decoder().backward(Tensor::from_matrix(ce_weight * f.ce.grad), f.decoder_tape);
    grad_z += g.matrix();
  }
  if (grad_projected) {
    if (model.head()) {
      grad_z += model.head()->backward(Tensor::from_matrix(*grad_projected), f.head_tape).matrix();
    } else {
      grad_z += *grad_projected;
    }
  }
  model.encoder().backward(Tensor::from_matrix(grad_z), f.encoder_tape);
}

std::vector<PressureFrame> gather(const DataView& view, std::span<const std::size_t> positions) {
  std::vector<PressureFrame> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(view[p].frame);
  return out;
}

std::vector<int> gather_labels(const DataView& view, std::span<const std::size_t> positions) {
  std::vector<int> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(view[p].subject_id);
  return out;
}

struct PreparedBatch {
  Tensor x;
  std::vector<int> y;
};

PreparedBatch prepare(const DataView& view, std::span<const std::size_t> positions, const TrainConfig& config,
                      Rng& augment_rng) {
  auto frames = gather(view, positions);
  auto labels = gather_labels(view, positions);
  if (config.augment_enabled) {
    auto doubled = augment_batch(frames, labels, config.augment, augment_rng);
    return {frames_to_tensor(doubled.frames, config.model.input_scale), std::move(doubled.labels)};
  }
  return {frames_to_tensor(frames, config.model.input_scale), std::move(labels)};
}

void check_labels(const DataView& view, int class_count, const char* what) {
  for (std::size_t i = 0; i < view.size(); ++i)
    require(view[i].subject_id >= 0 && view[i].subject_id < class_count,
            std::string(what) + " contains a subject id outside [0, class_count)");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  require(std::isfinite(temperature) && temperature > 0.0, "temperature must be > 0");
  weights.validate();
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be > 0");
  require(epochs >= 0, "epochs must be >= 0");
  require(batch_size >= 2, "batch_size must be >= 2");
  model.validate();
  augment.validate();
}

std::string TrainHistory::to_csv() const {
  std::ostringstream os;
  os << "epoch,lce1,lce2,lcon,total,val_acc\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << format_double(e.lce1) << ',' << format_double(e.lce2) << ',' << format_double(e.lcon)
       << ',' << format_double(e.total) << ',' << format_double(e.val_acc) << '\n';
  }
  return os.str();
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << history.to_csv();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

StepLosses dual_branch_step(BranchModel& target, BranchModel* auxiliary, const Tensor& target_x,
                            std::span<const int> target_y, const Tensor* aux_x, std::span<const int> aux_y,
                            const TrainConfig& config, bool accumulate_gradients) {
  const auto& w = config.weights;
  const bool with_aux = auxiliary != nullptr && aux_x != nullptr;
  const bool contrast = w.contrastive > 0.0;

  StepLosses out;
  BranchForward ft = forward_branch(target, target_x, target_y, accumulate_gradients, contrast);
  out.ce_target = ft.ce.value;
  std::optional<BranchForward> fa;
  if (with_aux) {
    fa = forward_branch(*auxiliary, *aux_x, aux_y, accumulate_gradients, contrast);
    out.ce_auxiliary = fa->ce.value;
  }

  RowMatrix grad_t_proj, grad_a_proj;
  if (contrast) {
    const Eigen::Index nt = ft.projected.rows();
    const Eigen::Index na = with_aux ? fa->projected.rows() : 0;
    RowMatrix rows(nt + na, ft.projected.cols());
    rows.topRows(nt) = ft.projected;
    if (with_aux) rows.bottomRows(na) = fa->projected;
    std::vector<int> labels(target_y.begin(), target_y.end());
    if (with_aux) labels.insert(labels.end(), aux_y.begin(), aux_y.end());

    const ContrastProjection proj = project_for_contrast(rows);
    const auto con = supcon_loss_with_grad({proj.unit, std::move(labels), config.temperature});
    out.contrastive = con.value;
    if (accumulate_gradients) {
      const RowMatrix grad_rows = w.contrastive * project_for_contrast_backward(proj, con.grad);
      grad_t_proj = grad_rows.topRows(nt);
      if (with_aux) grad_a_proj = grad_rows.bottomRows(na);
    }
  }

  const bool finite = std::isfinite(out.ce_target) && std::isfinite(out.ce_auxiliary) && std::isfinite(out.contrastive);
  out.total = finite ? total_loss(out.ce_target, with_aux ? out.ce_auxiliary : 0.0, out.contrastive, w)
                     : std::numeric_limits<double>::quiet_NaN();
  if (!accumulate_gradients || !finite) return out;

  if (w.target_ce > 0.0 || contrast) backward_branch(target, ft, w.target_ce, contrast ? &grad_t_proj : nullptr);
  if (with_aux) {
    const bool contrast_to_aux = contrast && !config.stop_gradient_auxiliary;
    if (w.auxiliary_ce > 0.0 || contrast_to_aux)
      backward_branch(*auxiliary, *fa, w.auxiliary_ce, contrast_to_aux ? &grad_a_proj : nullptr);
  }
  return out;
}

std::vector<int> argmax_rows(const RowMatrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const BranchModel& model, std::span<const PressureFrame> frames) {
  return argmax_rows(model.decode(model.encode(frames)));
}

std::vector<int> predict(const BranchModel& model, const DataView& data) {
  const auto frames = data.frames();
  return argmax_rows(model.decode(model.encode(std::span<const PressureFrame* const>(frames))));
}

double accuracy(const BranchModel& model, const DataView& data) {
  require(!data.empty(), "accuracy: empty data");
  const auto predicted = predict(model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += predicted[i] == data[i].subject_id ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace detail {

TrainResult train_loop(const DataView& target_train, const DataView& val, const DataView* auxiliary,
                       const TrainConfig& config, BranchPair models) {
  config.validate();
  require(!target_train.empty(), "target training split is empty");
  require(auxiliary == nullptr || !auxiliary->empty(), "auxiliary dataset is empty");
  const int classes = config.model.class_count;
  check_labels(target_train, classes, "target training split");
  check_labels(val, classes, "validation split");
  if (auxiliary) check_labels(*auxiliary, classes, "auxiliary dataset");

  std::vector<Parameter*> params = models.target.parameters();
  if (auxiliary) {
    const auto aux_params = models.auxiliary.parameters();
    params.insert(params.end(), aux_params.begin(), aux_params.end());
  }
  Adam optimizer(params, config.learning_rate);

  auto target_sampling = make_rng(config.seed, kTargetSampling);
  auto aux_sampling = make_rng(config.seed, kAuxiliarySampling);
  auto target_augment = make_rng(config.seed, kTargetAugment);
  auto aux_augment = make_rng(config.seed, kAuxiliaryAugment);

  const std::size_t n = static_cast<std::size_t>(config.batch_size);
  const std::size_t anchor = auxiliary ? auxiliary->size() : target_train.size();
  const std::size_t steps = (anchor + n - 1) / n;
  std::uniform_int_distribution<std::size_t> pick_target(0, target_train.size() - 1);
  std::vector<std::size_t> aux_order(auxiliary ? auxiliary->size() : 0);

  TrainResult result{models.clone(), {}};
  double best = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (auxiliary) {
      std::iota(aux_order.begin(), aux_order.end(), std::size_t{0});
      std::shuffle(aux_order.begin(), aux_order.end(), aux_sampling);
    }
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * n;
      const std::size_t count = std::min(n, anchor - begin);
      std::vector<std::size_t> target_pos(count);
      for (auto& p : target_pos) p = pick_target(target_sampling);

      PreparedBatch tb = prepare(target_train, target_pos, config, target_augment);
      std::optional<PreparedBatch> ab;
      if (auxiliary) {
        ab = prepare(*auxiliary, std::span<const std::size_t>(aux_order).subspan(begin, count), config, aux_augment);
      }

      optimizer.zero_grad();
      const StepLosses losses = dual_branch_step(models.target, auxiliary ? &models.auxiliary : nullptr, tb.x, tb.y,
                                                 ab ? &ab->x : nullptr, ab ? std::span<const int>(ab->y) : std::span<const int>{},
                                                 config, true);
      if (!std::isfinite(losses.total)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch << ", step " << step + 1 << ": lce1=" << losses.ce_target
           << " lce2=" << losses.ce_auxiliary << " lcon=" << losses.contrastive;
        throw TrainingError(os.str());
      }
      optimizer.step();
      record.lce1 += losses.ce_target;
      record.lce2 += losses.ce_auxiliary;
      record.lcon += losses.contrastive;
      record.total += losses.total;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    record.lce1 *= inv;
    record.lce2 *= inv;
    record.lcon *= inv;
    record.total *= inv;

    if (val.empty()) {
      record.val_acc = std::numeric_limits<double>::quiet_NaN();
      result.history.epochs.push_back(record);
      continue;
    }
    record.val_acc = accuracy(models.target, val);
    result.history.epochs.push_back(record);
    if (record.val_acc > best) {
      best = record.val_acc;
      result.history.best_epoch = epoch;
      result.history.best_val_acc = record.val_acc;
      result.models = models.clone();
    }
  }
  if (val.empty()) {
    result.models = std::move(models);
    result.history.best_epoch = config.epochs;
  }
  return result;
}

}  // namespace detail

TrainResult train(const DataView& target_train, const DataView& target_val, const DataView* auxiliary,
                  const TrainConfig& config, std::optional<BranchPair> initial) {
  require(!target_val.empty(), "target validation split is empty");
  require(config.epochs >= 1, "epochs must be >= 1");
  BranchPair models = initial ? std::move(*initial) : init_model(config.model, config.seed);
  return detail::train_loop(target_train, target_val, auxiliary, config, std::move(models));
}

}  // namespace pressure_id
