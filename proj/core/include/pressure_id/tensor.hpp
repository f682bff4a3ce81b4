#pragma once

#include <Eigen/Core>
#include <Eigen/StdVector>
#include <cstddef>
#include <span>
#include <vector>

#include "pressure_id/frame.hpp"

namespace pressure_id {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Storage for anything viewed through Eigen::Map. Eigen picks vectorised code
/// paths from the buffer address, so a fixed alignment keeps results
/// bit-identical from run to run.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense NCHW batch of doubles.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w);

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return data_.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(c_) * h_ * w_; }
  bool same_shape(const Tensor& other) const {
    return n_ == other.n_ && c_ == other.c_ && h_ == other.h_ && w_ == other.w_;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* sample(int i) { return data_.data() + static_cast<std::size_t>(i) * sample_size(); }
  const double* sample(int i) const { return data_.data() + static_cast<std::size_t>(i) * sample_size(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  /// Row i is sample i flattened.
  Eigen::Map<RowMatrix> matrix() {
    return {data_.data(), n_, static_cast<Eigen::Index>(sample_size())};
  }
  Eigen::Map<const RowMatrix> matrix() const {
    return {data_.data(), n_, static_cast<Eigen::Index>(sample_size())};
  }

  /// Same data, new shape with equal element count.
  Tensor reshaped(int n, int c, int h, int w) const&;
  Tensor reshaped(int n, int c, int h, int w) &&;

  static Tensor from_matrix(const RowMatrix& m);

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  AlignedBuffer data_;
};

/// Stacks frames into an (N, 1, 56, 40) tensor, multiplying each value by `scale`.
Tensor frames_to_tensor(std::span<const PressureFrame> frames, double scale);
Tensor frames_to_tensor(std::span<const PressureFrame* const> frames, double scale);

}  // namespace pressure_id
