#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pressure_id {

/// 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image(int width, int height, std::uint8_t fill = 255);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

/// Encodes as a truecolour PNG.
std::vector<std::uint8_t> encode_png(const Image& image);
void write_png(const Image& image, const std::filesystem::path& path);

/// Row-normalised heatmap (white to dark blue), one square cell per entry,
/// with a grey grid and the diagonal outlined.
Image render_confusion(const std::vector<std::vector<std::size_t>>& confusion, int cell_px = 32);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  /// Optional symmetric error bars, same length as y.
  std::vector<double> error;
};

/// Line plot with square markers. y spans [0, 1]; x spans the data range.
/// Horizontal grid lines every 0.1.
Image render_curves(std::span<const PlotSeries> series, int width = 480, int height = 320);

}  // namespace pressure_id
