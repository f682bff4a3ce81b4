#include "pressure_id/layers.hpp"

#include <cmath>

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

void fill_normal(AlignedBuffer& v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& x : v) x = dist(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, std::mt19937_64& rng,
               double gain)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      padding_(padding),
      weight_("conv.weight", static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel),
      bias_("conv.bias", static_cast<std::size_t>(out_channels)) {
  require(in_channels > 0 && out_channels > 0 && kernel > 0 && stride > 0 && padding >= 0,
          "invalid convolution geometry");
  fill_normal(weight_.value, gain * std::sqrt(2.0 / (in_channels * kernel * kernel)), rng);
}

void Conv2d::im2col(const double* x, int h, int w, int oh, int ow, double* col) const {
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  for (int ci = 0; ci < in_; ++ci) {
    const double* xc = x + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < kernel_; ++ki) {
      for (int kj = 0; kj < kernel_; ++kj) {
        double* row = col + (static_cast<std::size_t>(ci * kernel_ + ki) * kernel_ + kj) * plane;
        for (int r = 0; r < oh; ++r) {
          const int ih = r * stride_ + ki - padding_;
          double* dst = row + static_cast<std::size_t>(r) * ow;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + ow, 0.0);
            continue;
          }
          const double* src = xc + static_cast<std::size_t>(ih) * w;
          for (int c = 0; c < ow; ++c) {
            const int iw = c * stride_ + kj - padding_;
            dst[c] = (iw >= 0 && iw < w) ? src[iw] : 0.0;
          }
        }
      }
    }
  }
}

void Conv2d::col2im(const double* col, int h, int w, int oh, int ow, double* dx) const {
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  for (int ci = 0; ci < in_; ++ci) {
    double* dxc = dx + static_cast<std::size_t>(ci) * h * w;
    for (int ki = 0; ki < kernel_; ++ki) {
      for (int kj = 0; kj < kernel_; ++kj) {
        const double* row = col + (static_cast<std::size_t>(ci * kernel_ + ki) * kernel_ + kj) * plane;
        for (int r = 0; r < oh; ++r) {
          const int ih = r * stride_ + ki - padding_;
          if (ih < 0 || ih >= h) continue;
          const double* src = row + static_cast<std::size_t>(r) * ow;
          double* dst = dxc + static_cast<std::size_t>(ih) * w;
          for (int c = 0; c < ow; ++c) {
            const int iw = c * stride_ + kj - padding_;
            if (iw >= 0 && iw < w) dst[iw] += src[c];
          }
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x, LayerTape* tape) const {
  require(x.c() == in_, "conv input has " + std::to_string(x.c()) + " channels, expected " + std::to_string(in_));
  const int oh = output_size(x.h(), 0), ow = output_size(x.w(), 1);
  require(oh > 0 && ow > 0, "conv input is smaller than the kernel");
  const Eigen::Index patch = static_cast<Eigen::Index>(in_) * kernel_ * kernel_;
  const Eigen::Index plane = static_cast<Eigen::Index>(oh) * ow;

  Tensor y(x.n(), out_, oh, ow);
  AlignedBuffer col(static_cast<std::size_t>(patch * plane));
  ConstMatrixMap W(weight_.value.data(), out_, patch);
  ConstVectorMap b(bias_.value.data(), out_);
  MatrixMap C(col.data(), patch, plane);
  for (int i = 0; i < x.n(); ++i) {
    im2col(x.sample(i), x.h(), x.w(), oh, ow, col.data());
    MatrixMap Y(y.sample(i), out_, plane);
    Y.noalias() = W * C;
    Y.colwise() += b;
  }
  if (tape) tape->saved = {x};
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out, const LayerTape& tape) {
  const Tensor& x = tape.saved.at(0);
  const int oh = grad_out.h(), ow = grad_out.w();
  const Eigen::Index patch = static_cast<Eigen::Index>(in_) * kernel_ * kernel_;
  const Eigen::Index plane = static_cast<Eigen::Index>(oh) * ow;

  Tensor dx(x.n(), x.c(), x.h(), x.w());
  AlignedBuffer col(static_cast<std::size_t>(patch * plane));
  AlignedBuffer dcol(col.size());
  ConstMatrixMap W(weight_.value.data(), out_, patch);
  MatrixMap dW(weight_.grad.data(), out_, patch);
  VectorMap db(bias_.grad.data(), out_);
  MatrixMap C(col.data(), patch, plane);
  MatrixMap dC(dcol.data(), patch, plane);
  for (int i = 0; i < x.n(); ++i) {
    im2col(x.sample(i), x.h(), x.w(), oh, ow, col.data());
    ConstMatrixMap dY(grad_out.sample(i), out_, plane);
    dW.noalias() += dY * C.transpose();
    db += dY.rowwise().sum();
    dC.noalias() = W.transpose() * dY;
    col2im(dcol.data(), x.h(), x.w(), oh, ow, dx.sample(i));
  }
  return dx;
}

void Conv2d::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_features, int out_features, std::mt19937_64& rng, double gain)
    : in_(in_features),
      out_(out_features),
      weight_("linear.weight", static_cast<std::size_t>(out_features) * in_features),
      bias_("linear.bias", static_cast<std::size_t>(out_features)) {
  require(in_features > 0 && out_features > 0, "linear layer sizes must be positive");
  fill_normal(weight_.value, gain / std::sqrt(static_cast<double>(in_features)), rng);
}

Tensor Linear::forward(const Tensor& x, LayerTape* tape) const {
  require(x.sample_size() == static_cast<std::size_t>(in_),
          "linear input width " + std::to_string(x.sample_size()) + " does not match " + std::to_string(in_));
  ConstMatrixMap W(weight_.value.data(), out_, in_);
  ConstVectorMap b(bias_.value.data(), out_);
  Tensor y(x.n(), out_, 1, 1);
  auto Y = y.matrix();
  Y.noalias() = x.matrix() * W.transpose();
  Y.rowwise() += b.transpose();
  if (tape) tape->saved = {x};
  return y;
}

Tensor Linear::backward(const Tensor& grad_out, const LayerTape& tape) {
  const Tensor& x = tape.saved.at(0);
  ConstMatrixMap W(weight_.value.data(), out_, in_);
  MatrixMap dW(weight_.grad.data(), out_, in_);
  VectorMap db(bias_.grad.data(), out_);
  const auto dY = grad_out.matrix();
  dW.noalias() += dY.transpose() * x.matrix();
  db += dY.colwise().sum().transpose();
  Tensor dx(x.n(), x.c(), x.h(), x.w());
  dx.matrix().noalias() = dY * W;
  return dx;
}

void Linear::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// Element-wise and pooling layers

Tensor Relu::forward(const Tensor& x, LayerTape* tape) const {
  Tensor y = x;
  for (auto& v : y.span()) v = v > 0.0 ? v : 0.0;
  if (tape) tape->saved = {y};
  return y;
}

Tensor Relu::backward(const Tensor& grad_out, const LayerTape& tape) {
  const Tensor& y = tape.saved.at(0);
  Tensor dx = grad_out;
  auto d = dx.span();
  const auto out = y.span();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!(out[i] > 0.0)) d[i] = 0.0;
  return dx;
}

Tensor AvgPool2::forward(const Tensor& x, LayerTape* tape) const {
  const int oh = x.h() / 2, ow = x.w() / 2;
  require(oh > 0 && ow > 0, "avg-pool input is smaller than 2x2");
  Tensor y(x.n(), x.c(), oh, ow);
  for (int i = 0; i < x.n(); ++i)
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.sample(i) + static_cast<std::size_t>(c) * x.h() * x.w();
      double* dst = y.sample(i) + static_cast<std::size_t>(c) * oh * ow;
      for (int r = 0; r < oh; ++r)
        for (int q = 0; q < ow; ++q) {
          const double* p = src + static_cast<std::size_t>(2 * r) * x.w() + 2 * q;
          dst[r * ow + q] = 0.25 * (p[0] + p[1] + p[x.w()] + p[x.w() + 1]);
        }
    }
  if (tape) tape->shape = {x.n(), x.c(), x.h(), x.w()};
  return y;
}

Tensor AvgPool2::backward(const Tensor& grad_out, const LayerTape& tape) {
  const auto [n, ch, h, w] = tape.shape;
  const int oh = grad_out.h(), ow = grad_out.w();
  Tensor dx(n, ch, h, w);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < ch; ++c) {
      const double* g = grad_out.sample(i) + static_cast<std::size_t>(c) * oh * ow;
      double* dst = dx.sample(i) + static_cast<std::size_t>(c) * h * w;
      for (int r = 0; r < oh; ++r)
        for (int q = 0; q < ow; ++q) {
          const double v = 0.25 * g[r * ow + q];
          double* p = dst + static_cast<std::size_t>(2 * r) * w + 2 * q;
          p[0] += v;
          p[1] += v;
          p[w] += v;
          p[w + 1] += v;
        }
    }
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, LayerTape* tape) const {
  Tensor y(x.n(), x.c(), 1, 1);
  const std::size_t plane = static_cast<std::size_t>(x.h()) * x.w();
  for (int i = 0; i < x.n(); ++i)
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.sample(i) + c * plane;
      double sum = 0.0;
      for (std::size_t k = 0; k < plane; ++k) sum += src[k];
      y.sample(i)[c] = sum / static_cast<double>(plane);
    }
  if (tape) tape->shape = {x.n(), x.c(), x.h(), x.w()};
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& grad_out, const LayerTape& tape) {
  const auto [n, ch, h, w] = tape.shape;
  Tensor dx(n, ch, h, w);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < ch; ++c) {
      const double v = grad_out.sample(i)[c] / static_cast<double>(plane);
      double* dst = dx.sample(i) + c * plane;
      std::fill(dst, dst + plane, v);
    }
  return dx;
}

Tensor Upsample2::forward(const Tensor& x, LayerTape* tape) const {
  Tensor y(x.n(), x.c(), 2 * x.h(), 2 * x.w());
  const int h = x.h(), w = x.w();
  for (int i = 0; i < x.n(); ++i)
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.sample(i) + static_cast<std::size_t>(c) * h * w;
      double* dst = y.sample(i) + static_cast<std::size_t>(c) * 4 * h * w;
      for (int r = 0; r < 2 * h; ++r)
        for (int q = 0; q < 2 * w; ++q) dst[r * 2 * w + q] = src[(r / 2) * w + q / 2];
    }
  if (tape) tape->shape = {x.n(), x.c(), x.h(), x.w()};
  return y;
}

Tensor Upsample2::backward(const Tensor& grad_out, const LayerTape& tape) {
  const auto [n, ch, h, w] = tape.shape;
  Tensor dx(n, ch, h, w);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < ch; ++c) {
      const double* g = grad_out.sample(i) + static_cast<std::size_t>(c) * 4 * h * w;
      double* dst = dx.sample(i) + static_cast<std::size_t>(c) * h * w;
      for (int r = 0; r < 2 * h; ++r)
        for (int q = 0; q < 2 * w; ++q) dst[(r / 2) * w + q / 2] += g[r * 2 * w + q];
    }
  return dx;
}

Tensor Unflatten::forward(const Tensor& x, LayerTape*) const {
  require(x.sample_size() == static_cast<std::size_t>(c_) * h_ * w_, "unflatten size mismatch");
  return x.reshaped(x.n(), c_, h_, w_);
}

Tensor Unflatten::backward(const Tensor& grad_out, const LayerTape&) {
  return grad_out.reshaped(grad_out.n(), c_ * h_ * w_, 1, 1);
}

// ---------------------------------------------------------------------------
// ResidualBlock

ResidualBlock::ResidualBlock(int in_channels, int out_channels, int stride, std::mt19937_64& rng)
    : conv1_(in_channels, out_channels, 3, stride, 1, rng),
      conv2_(out_channels, out_channels, 3, 1, 1, rng, 0.5) {
  if (stride != 1 || in_channels != out_channels)
    projection_ = std::make_unique<Conv2d>(in_channels, out_channels, 1, stride, 0, rng);
}

ResidualBlock::ResidualBlock(const ResidualBlock& other)
    : Layer(other),
      conv1_(other.conv1_),
      conv2_(other.conv2_),
      projection_(other.projection_ ? std::make_unique<Conv2d>(*other.projection_) : nullptr) {}

Tensor ResidualBlock::forward(const Tensor& x, LayerTape* tape) const {
  if (tape) tape->children.resize(3);
  Tensor a1 = conv1_.forward(x, tape ? &tape->children[0] : nullptr);
  for (auto& v : a1.span()) v = v > 0.0 ? v : 0.0;
  Tensor y = conv2_.forward(a1, tape ? &tape->children[1] : nullptr);
  if (projection_) {
    const Tensor s = projection_->forward(x, tape ? &tape->children[2] : nullptr);
    y.matrix() += s.matrix();
  } else {
    y.matrix() += x.matrix();
  }
  for (auto& v : y.span()) v = v > 0.0 ? v : 0.0;
  if (tape) tape->saved = {std::move(a1), y};
  return y;
}

Tensor ResidualBlock::backward(const Tensor& grad_out, const LayerTape& tape) {
  const Tensor& a1 = tape.saved.at(0);
  const Tensor& y = tape.saved.at(1);
  Tensor g = grad_out;
  {
    auto gs = g.span();
    const auto ys = y.span();
    for (std::size_t i = 0; i < gs.size(); ++i)
      if (!(ys[i] > 0.0)) gs[i] = 0.0;
  }
  Tensor da1 = conv2_.backward(g, tape.children[1]);
  {
    auto ds = da1.span();
    const auto as = a1.span();
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (!(as[i] > 0.0)) ds[i] = 0.0;
  }
  Tensor dx = conv1_.backward(da1, tape.children[0]);
  if (projection_) {
    dx.matrix() += projection_->backward(g, tape.children[2]).matrix();
  } else {
    dx.matrix() += g.matrix();
  }
  return dx;
}

void ResidualBlock::collect_parameters(std::vector<Parameter*>& out) {
  conv1_.collect_parameters(out);
  conv2_.collect_parameters(out);
  if (projection_) projection_->collect_parameters(out);
}

// ---------------------------------------------------------------------------
// Sequential

Sequential::Sequential(const Sequential& other) : Layer(other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) {
    Sequential copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor Sequential::forward(const Tensor& x, LayerTape* tape) const {
  if (tape) tape->children.resize(layers_.size());
  if (layers_.empty()) return x;
  Tensor h = layers_[0]->forward(x, tape ? &tape->children[0] : nullptr);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, tape ? &tape->children[i] : nullptr);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out, const LayerTape& tape) {
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, tape.children[i]);
  return g;
}

void Sequential::collect_parameters(std::vector<Parameter*>& out) {
  for (auto& l : layers_) l->collect_parameters(out);
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  collect_parameters(out);
  return out;
}

std::size_t count_parameters(Sequential& net) {
  std::size_t total = 0;
  for (const auto* p : net.parameters()) total += p->value.size();
  return total;
}

}  // namespace pressure_id
