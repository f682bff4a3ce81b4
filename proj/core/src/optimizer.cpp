#include "pressure_id/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "pressure_id/errors.hpp"

namespace pressure_id {

Adam::Adam(std::vector<Parameter*> parameters, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  require(learning_rate > 0.0, "learning rate must be positive");
  for (auto* p : parameters)
    if (std::find(params_.begin(), params_.end(), p) == params_.end()) params_.push_back(p);
  for (const auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& value = params_[k]->value;
    const auto& grad = params_[k]->grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

}  // namespace pressure_id
