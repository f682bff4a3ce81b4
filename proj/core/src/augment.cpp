#include "pressure_id/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void AugmentConfig::validate() const {
  require(valid_probability(p_flip) && valid_probability(p_rotate) && valid_probability(p_translate),
          "augmentation probabilities must lie in [0, 1]");
  require(std::isfinite(max_rotate_deg) && max_rotate_deg >= 0.0, "max_rotate_deg must be >= 0");
  require(max_translate_px >= 0 && max_translate_px < std::min(kFrameRows, kFrameCols),
          "max_translate_px must lie in [0, 40)");
}

PressureFrame flip_horizontal(const PressureFrame& frame) {
  PressureFrame out;
  for (int r = 0; r < kFrameRows; ++r)
    for (int c = 0; c < kFrameCols; ++c) out.at(r, c) = frame.at(r, kFrameCols - 1 - c);
  return out;
}

PressureFrame rotate(const PressureFrame& frame, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cr = (kFrameRows - 1) / 2.0, cc = (kFrameCols - 1) / 2.0;
  auto sample = [&](int r, int c) -> double {
    if (r < 0 || r >= kFrameRows || c < 0 || c >= kFrameCols) return 0.0;
    return frame.at(r, c);
  };
  PressureFrame out;
  for (int r = 0; r < kFrameRows; ++r) {
    for (int c = 0; c < kFrameCols; ++c) {
      // Inverse mapping: where does output cell (r, c) come from?
      const double dr = r - cr, dc = c - cc;
      const double sr = cr + dr * ct + dc * st;
      const double sc = cc - dr * st + dc * ct;
      const double r0 = std::floor(sr), c0 = std::floor(sc);
      const double fr = sr - r0, fc = sc - c0;
      const int ir = static_cast<int>(r0), ic = static_cast<int>(c0);
      double v = (1.0 - fr) * (1.0 - fc) * sample(ir, ic);
      if (fc > 0.0) v += (1.0 - fr) * fc * sample(ir, ic + 1);
      if (fr > 0.0) v += fr * (1.0 - fc) * sample(ir + 1, ic);
      if (fr > 0.0 && fc > 0.0) v += fr * fc * sample(ir + 1, ic + 1);
      out.at(r, c) = static_cast<float>(std::max(0.0, v));
    }
  }
  return out;
}

PressureFrame translate(const PressureFrame& frame, int d_row, int d_col) {
  PressureFrame out;
  for (int r = 0; r < kFrameRows; ++r) {
    const int sr = r - d_row;
    if (sr < 0 || sr >= kFrameRows) continue;
    for (int c = 0; c < kFrameCols; ++c) {
      const int sc = c - d_col;
      if (sc < 0 || sc >= kFrameCols) continue;
      out.at(r, c) = frame.at(sr, sc);
    }
  }
  return out;
}

PressureFrame augment_frame(const PressureFrame& frame, const AugmentConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PressureFrame out = frame;
  if (unit(rng) < config.p_flip) out = flip_horizontal(out);
  if (unit(rng) < config.p_rotate) {
    std::uniform_real_distribution<double> angle(-config.max_rotate_deg, config.max_rotate_deg);
    out = rotate(out, angle(rng));
  }
  if (unit(rng) < config.p_translate) {
    std::uniform_int_distribution<int> shift(-config.max_translate_px, config.max_translate_px);
    const int dr = shift(rng);
    const int dc = shift(rng);
    out = translate(out, dr, dc);
  }
  return out;
}

AugmentedBatch augment_batch(std::span<const PressureFrame> frames, std::span<const int> labels,
                             const AugmentConfig& config, Rng& rng) {
  require(frames.size() == labels.size(), "augment_batch: " + std::to_string(frames.size()) + " frames but " +
                                              std::to_string(labels.size()) + " labels");
  AugmentedBatch out;
  out.frames.reserve(2 * frames.size());
  out.labels.reserve(2 * labels.size());
  out.frames.assign(frames.begin(), frames.end());
  for (const auto& f : frames) out.frames.push_back(augment_frame(f, config, rng));
  out.labels.assign(labels.begin(), labels.end());
  out.labels.insert(out.labels.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace pressure_id
