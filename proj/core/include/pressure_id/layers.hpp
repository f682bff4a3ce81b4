#pragma once

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pressure_id/tensor.hpp"

namespace pressure_id {

struct Parameter {
  Parameter(std::string name, std::size_t size) : name(std::move(name)), value(size, 0.0), grad(size, 0.0) {}

  std::string name;
  AlignedBuffer value;
  AlignedBuffer grad;

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// What a forward pass keeps so that backward can run later. Layers that
/// contain sub-layers keep one child tape per sub-layer.
struct LayerTape {
  std::vector<Tensor> saved;
  std::vector<LayerTape> children;
  std::array<int, 4> shape{};
};

/// A differentiable block. `forward` with a null tape is pure inference and
/// safe to call concurrently; `backward` accumulates into parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, LayerTape* tape) const = 0;
  virtual Tensor backward(const Tensor& grad_out, const LayerTape& tape) = 0;
  virtual void collect_parameters(std::vector<Parameter*>& out) { (void)out; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv2d final : public Layer {
 public:
  /// He-normal weights scaled by `gain`, zero bias.
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, std::mt19937_64& rng,
         double gain = 1.0);

  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  int output_size(int input, int) const { return (input + 2 * padding_ - kernel_) / stride_ + 1; }

 private:
  void im2col(const double* x, int h, int w, int oh, int ow, double* col) const;
  void col2im(const double* col, int h, int w, int oh, int ow, double* dx) const;

  int in_, out_, kernel_, stride_, padding_;
  Parameter weight_;
  Parameter bias_;
};

class Linear final : public Layer {
 public:
  /// Normal(0, gain / sqrt(in)) weights, zero bias.
  Linear(int in_features, int out_features, std::mt19937_64& rng, double gain = 1.0);

  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Linear>(*this); }

  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  int in_, out_;
  Parameter weight_;
  Parameter bias_;
};

class Relu final : public Layer {
 public:
  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }
};

/// 2x2 average pooling, stride 2; odd trailing rows/cols are dropped.
class AvgPool2 final : public Layer {
 public:
  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<AvgPool2>(*this); }
};

class GlobalAvgPool final : public Layer {
 public:
  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAvgPool>(*this); }
};

/// Nearest-neighbour 2x upsampling.
class Upsample2 final : public Layer {
 public:
  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Upsample2>(*this); }
};

/// Reinterprets (N, C*H*W, 1, 1) as (N, C, H, W).
class Unflatten final : public Layer {
 public:
  Unflatten(int c, int h, int w) : c_(c), h_(h), w_(w) {}
  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Unflatten>(*this); }

 private:
  int c_, h_, w_;
};

/// Basic residual block without normalisation:
/// y = relu(conv2(relu(conv1(x))) + shortcut(x)), shortcut is a strided 1x1
/// conv when the shape changes. conv2 starts small so deep stacks begin near
/// the identity.
class ResidualBlock final : public Layer {
 public:
  ResidualBlock(int in_channels, int out_channels, int stride, std::mt19937_64& rng);
  ResidualBlock(const ResidualBlock& other);
  ResidualBlock& operator=(const ResidualBlock&) = delete;

  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ResidualBlock>(*this); }

 private:
  Conv2d conv1_;
  Conv2d conv2_;
  std::unique_ptr<Conv2d> projection_;
};

class Sequential final : public Layer {
 public:
  Sequential() = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  Sequential& add(Args&&... args) {
    layers_.push_back(std::make_unique<L>(std::forward<Args>(args)...));
    return *this;
  }
  Sequential& add(std::unique_ptr<Layer> layer) {
    layers_.push_back(std::move(layer));
    return *this;
  }

  Tensor forward(const Tensor& x, LayerTape* tape) const override;
  Tensor backward(const Tensor& grad_out, const LayerTape& tape) override;
  void collect_parameters(std::vector<Parameter*>& out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Sequential>(*this); }

  std::vector<Parameter*> parameters();
  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

std::size_t count_parameters(Sequential& net);

}  // namespace pressure_id
