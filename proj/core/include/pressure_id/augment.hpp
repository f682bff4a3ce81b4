#pragma once

#include <random>
#include <span>
#include <vector>

#include "pressure_id/frame.hpp"

namespace pressure_id {

using Rng = std::mt19937_64;

struct AugmentConfig {
  double p_flip = 0.5;
  double p_rotate = 0.5;
  double p_translate = 0.5;
  double max_rotate_deg = 15.0;
  int max_translate_px = 4;

  void validate() const;
  static AugmentConfig disabled() { return {0.0, 0.0, 0.0, 0.0, 0}; }
};

/// Mirrors columns (left-right).
PressureFrame flip_horizontal(const PressureFrame& frame);

/// Rotates about the grid centre with bilinear resampling; cells mapped from
/// outside the grid read as zero.
PressureFrame rotate(const PressureFrame& frame, double degrees);

/// out(r, c) = in(r - d_row, c - d_col); vacated cells are zero.
PressureFrame translate(const PressureFrame& frame, int d_row, int d_col);

/// Applies flip, rotate and translate independently, in that order, each with
/// its own probability.
PressureFrame augment_frame(const PressureFrame& frame, const AugmentConfig& config, Rng& rng);

struct AugmentedBatch {
  std::vector<PressureFrame> frames;
  std::vector<int> labels;
};

/// Returns {X, Aug(X)} with labels {Y, Y}: the first N frames are the inputs
/// unchanged and frame N+i is an augmented view of input i.
AugmentedBatch augment_batch(std::span<const PressureFrame> frames, std::span<const int> labels,
                             const AugmentConfig& config, Rng& rng);

}  // namespace pressure_id
