#include "pressure_id/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

void check_logits(const RowMatrix& logits, std::span<const int> labels) {
  require(logits.rows() > 0, "cross_entropy: empty batch");
  require(static_cast<std::size_t>(logits.rows()) == labels.size(),
          "cross_entropy: " + std::to_string(logits.rows()) + " logit rows but " + std::to_string(labels.size()) +
              " labels");
  for (int y : labels) require(y >= 0 && y < logits.cols(), "cross_entropy: label out of range");
}

struct SupconPlan {
  std::vector<int> positives;  // |P(i)| per row
  int anchors = 0;             // |I|
};

SupconPlan plan_supcon(const ContrastiveBatch& batch) {
  const auto n = batch.embeddings.rows();
  require(batch.temperature > 0.0 && std::isfinite(batch.temperature), "supcon_loss: temperature must be > 0");
  require(n >= 2, "supcon_loss: need at least 2 rows");
  require(static_cast<std::size_t>(n) == batch.labels.size(), "supcon_loss: label count does not match rows");
  SupconPlan plan;
  plan.positives.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && batch.labels[static_cast<std::size_t>(j)] == batch.labels[static_cast<std::size_t>(i)])
        ++plan.positives[static_cast<std::size_t>(i)];
    if (plan.positives[static_cast<std::size_t>(i)] > 0) ++plan.anchors;
  }
  require(plan.anchors > 0, "supcon_loss: no row has a positive; the loss is undefined");
  return plan;
}

// Shared by the value-only and gradient paths. When `coeff` is non-null it
// receives dL/ds_ij for the similarity matrix s = Z Z^T / t.
double supcon_impl(const ContrastiveBatch& batch, RowMatrix* coeff) {
  const SupconPlan plan = plan_supcon(batch);
  const auto n = batch.embeddings.rows();
  const RowMatrix sim = (batch.embeddings * batch.embeddings.transpose()) / batch.temperature;
  const double inv_anchors = 1.0 / plan.anchors;
  if (coeff) coeff->setZero(n, n);

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int num_pos = plan.positives[static_cast<std::size_t>(i)];
    if (num_pos == 0) continue;
    const int yi = batch.labels[static_cast<std::size_t>(i)];

    double max_all = -std::numeric_limits<double>::infinity();
    double max_pos = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      max_all = std::max(max_all, sim(i, j));
      if (batch.labels[static_cast<std::size_t>(j)] == yi) max_pos = std::max(max_pos, sim(i, j));
    }
    double sum_all = 0.0, sum_pos = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sum_all += std::exp(sim(i, j) - max_all);
      if (batch.labels[static_cast<std::size_t>(j)] == yi) sum_pos += std::exp(sim(i, j) - max_pos);
    }
    const double log_all = max_all + std::log(sum_all);
    const double log_pos = max_pos + std::log(sum_pos);
    total += log_all - log_pos + std::log(static_cast<double>(num_pos));

    if (coeff) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double g = std::exp(sim(i, j) - log_all);
        if (batch.labels[static_cast<std::size_t>(j)] == yi) g -= std::exp(sim(i, j) - log_pos);
        (*coeff)(i, j) = g * inv_anchors;
      }
    }
  }
  return total * inv_anchors;
}

}  // namespace

void LossWeights::validate() const {
  for (double w : {target_ce, auxiliary_ce, contrastive})
    require(std::isfinite(w) && w >= 0.0, "loss weights must be finite and non-negative");
  require(target_ce > 0.0 || auxiliary_ce > 0.0 || contrastive > 0.0, "at least one loss weight must be positive");
}

RowMatrix softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - m);
      sum += out(i, j);
    }
    out.row(i) /= sum;
  }
  return out;
}

double cross_entropy(const RowMatrix& logits, std::span<const int> labels) {
  check_logits(logits, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) sum += std::exp(logits(i, j) - m);
    total += m + std::log(sum) - logits(i, labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

LossWithGrad cross_entropy_with_grad(const RowMatrix& logits, std::span<const int> labels) {
  LossWithGrad out;
  out.value = cross_entropy(logits, labels);
  out.grad = softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out.grad(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
  out.grad *= inv_n;
  return out;
}

double supcon_loss(const ContrastiveBatch& batch) { return supcon_impl(batch, nullptr); }

LossWithGrad supcon_loss_with_grad(const ContrastiveBatch& batch) {
  RowMatrix coeff;
  LossWithGrad out;
  out.value = supcon_impl(batch, &coeff);
  // s_ij = z_i.z_j / t  =>  dL/dZ = (C + C^T) Z / t
  const RowMatrix sym = coeff + coeff.transpose();
  out.grad = (sym * batch.embeddings) / batch.temperature;
  return out;
}

double total_loss(double ce_target, double ce_auxiliary, double contrastive, const LossWeights& weights) {
  weights.validate();
  require(std::isfinite(ce_target) && std::isfinite(ce_auxiliary) && std::isfinite(contrastive),
          "total_loss: loss terms must be finite");
  return std::fma(weights.target_ce, ce_target,
                  std::fma(weights.auxiliary_ce, ce_auxiliary, weights.contrastive * contrastive));
}

}  // namespace pressure_id
