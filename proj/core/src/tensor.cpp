#include "pressure_id/tensor.hpp"

#include "pressure_id/errors.hpp"

namespace pressure_id {

Tensor::Tensor(int n, int c, int h, int w)
    : n_(n), c_(c), h_(h), w_(w),
      data_(static_cast<std::size_t>(n) * c * h * w, 0.0) {
  require(n >= 0 && c >= 0 && h >= 0 && w >= 0, "tensor dimensions must be non-negative");
}

Tensor Tensor::reshaped(int n, int c, int h, int w) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(n, c, h, w);
}

Tensor Tensor::reshaped(int n, int c, int h, int w) && {
  require(static_cast<std::size_t>(n) * c * h * w == data_.size(), "reshape must preserve element count");
  Tensor out;
  out.n_ = n;
  out.c_ = c;
  out.h_ = h;
  out.w_ = w;
  out.data_ = std::move(data_);
  return out;
}

Tensor Tensor::from_matrix(const RowMatrix& m) {
  Tensor t(static_cast<int>(m.rows()), static_cast<int>(m.cols()), 1, 1);
  t.matrix() = m;
  return t;
}

namespace {

template <typename Get>
Tensor stack(std::size_t count, double scale, Get get) {
  Tensor t(static_cast<int>(count), 1, kFrameRows, kFrameCols);
  for (std::size_t i = 0; i < count; ++i) {
    const auto values = get(i).values();
    double* dst = t.sample(static_cast<int>(i));
    for (std::size_t k = 0; k < kFrameCells; ++k) dst[k] = static_cast<double>(values[k]) * scale;
  }
  return t;
}

}  // namespace

Tensor frames_to_tensor(std::span<const PressureFrame> frames, double scale) {
  return stack(frames.size(), scale, [&](std::size_t i) -> const PressureFrame& { return frames[i]; });
}

Tensor frames_to_tensor(std::span<const PressureFrame* const> frames, double scale) {
  return stack(frames.size(), scale, [&](std::size_t i) -> const PressureFrame& { return *frames[i]; });
}

}  // namespace pressure_id
