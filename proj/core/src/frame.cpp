#include "pressure_id/frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pressure_id/errors.hpp"

namespace pressure_id {

PressureFrame::PressureFrame(std::vector<float> values) : values_(std::move(values)) {
  require(values_.size() == kFrameCells,
          "pressure frame must have 56x40 = 2240 values, got " + std::to_string(values_.size()));
  require(std::all_of(values_.begin(), values_.end(),
                      [](float v) { return std::isfinite(v) && v >= 0.0f; }),
          "pressure frame values must be finite and non-negative");
}

double PressureFrame::total() const {
  double sum = 0.0;
  for (float v : values_) sum += v;
  return sum;
}

bool PressureFrame::is_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return v >= 0.0f; });
}

std::string_view to_string(Device device) {
  return device == Device::target ? "target" : "auxiliary";
}

Device device_from_string(std::string_view name) {
  if (name == "target") return Device::target;
  if (name == "auxiliary") return Device::auxiliary;
  throw ValidationError("unknown device '" + std::string(name) + "'");
}

}  // namespace pressure_id
