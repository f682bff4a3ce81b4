#pragma once

#include <vector>

#include "pressure_id/layers.hpp"

namespace pressure_id {

/// Adam with bias correction; no weight decay, constant learning rate.
class Adam {
 public:
  /// Duplicate pointers (a decoder shared by two branches) are kept once.
  explicit Adam(std::vector<Parameter*> parameters, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void zero_grad();
  void step();

  const std::vector<Parameter*>& parameters() const { return params_; }
  long steps_taken() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace pressure_id
