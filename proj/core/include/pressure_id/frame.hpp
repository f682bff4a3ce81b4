#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pressure_id {

inline constexpr int kFrameRows = 56;
inline constexpr int kFrameCols = 40;
inline constexpr std::size_t kFrameCells = static_cast<std::size_t>(kFrameRows) * kFrameCols;

/// One 56x40 map of non-negative pressure readings, stored row-major.
class PressureFrame {
 public:
  PressureFrame() : values_(kFrameCells, 0.0f) {}

  /// Throws ValidationError unless `values` has 2240 finite, non-negative entries.
  explicit PressureFrame(std::vector<float> values);

  float at(int row, int col) const { return values_[index(row, col)]; }
  float& at(int row, int col) { return values_[index(row, col)]; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  double total() const;
  bool is_nonnegative() const;

  friend bool operator==(const PressureFrame&, const PressureFrame&) = default;

  static constexpr std::size_t index(int row, int col) {
    return static_cast<std::size_t>(row) * kFrameCols + static_cast<std::size_t>(col);
  }

 private:
  std::vector<float> values_;
};

enum class Device : std::uint8_t { target = 0, auxiliary = 1 };

std::string_view to_string(Device device);
Device device_from_string(std::string_view name);

struct SampleRecord {
  PressureFrame frame;
  int subject_id = 0;
  int posture_id = 0;
  Device device = Device::target;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

}  // namespace pressure_id
