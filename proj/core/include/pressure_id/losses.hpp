#pragma once

#include <span>
#include <vector>

#include "pressure_id/tensor.hpp"

namespace pressure_id {

/// Weights of the combined objective
///   L = target_ce * L_ce(target) + auxiliary_ce * L_ce(auxiliary) + contrastive * L_con.
struct LossWeights {
  double target_ce = 0.15;
  double auxiliary_ce = 0.15;
  double contrastive = 0.7;

  /// Non-negative, finite, at least one positive.
  void validate() const;
};

/// Rows of target and auxiliary embeddings stacked together. Positives of row i
/// are all other rows with the same label, whichever device they came from.
struct ContrastiveBatch {
  RowMatrix embeddings;
  std::vector<int> labels;
  double temperature = 0.1;
};

struct LossWithGrad {
  double value = 0.0;
  RowMatrix grad;  // d value / d input, same shape as the input
};

/// Mean of -log softmax(logits)[label] over rows.
double cross_entropy(const RowMatrix& logits, std::span<const int> labels);
LossWithGrad cross_entropy_with_grad(const RowMatrix& logits, std::span<const int> labels);

/// Supervised contrastive loss with the mean over positives inside the log:
///
///   L = 1/|I| sum_i -log( 1/|P(i)| sum_{p in P(i)} exp(z_i.z_p / t) / sum_{a != i} exp(z_i.z_a / t) )
///
/// Rows without positives are left out of I. Throws ValidationError when no row
/// has a positive or when t <= 0.
double supcon_loss(const ContrastiveBatch& batch);
LossWithGrad supcon_loss_with_grad(const ContrastiveBatch& batch);

/// Weighted sum of the three terms; rejects non-finite inputs.
double total_loss(double ce_target, double ce_auxiliary, double contrastive, const LossWeights& weights);

/// Row-wise softmax.
RowMatrix softmax(const RowMatrix& logits);

}  // namespace pressure_id
