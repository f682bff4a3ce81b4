#include "pressure_id/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 4> kPalette{{
    {31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}}};

}  // namespace

Image::Image(int w, int h, std::uint8_t fill) : width(w), height(h) {
  require(w > 0 && h > 0, "image dimensions must be positive");
  rgb.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill);
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void Image::fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = std::max(0, y0); y < std::min(height, y1); ++y)
    for (int x = std::max(0, x0); x < std::min(width, x1); ++x) set(x, y, r, g, b);
}

void Image::line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    set(x0, y0, r, g, b);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width);
  desc.height = static_cast<png_uint_32>(image.height);
  desc.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.rgb.data(), 0, nullptr))
    throw IoError(std::string("png encoding failed: ") + desc.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.rgb.data(), 0, nullptr))
    throw IoError(std::string("png encoding failed: ") + desc.message);
  out.resize(size);
  return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Image render_confusion(const std::vector<std::vector<std::size_t>>& confusion, int cell_px) {
  const int k = static_cast<int>(confusion.size());
  require(k > 0, "confusion matrix is empty");
  require(cell_px >= 2, "cell size must be >= 2");
  for (const auto& row : confusion) require(static_cast<int>(row.size()) == k, "confusion matrix must be square");
  Image img(k * cell_px + 1, k * cell_px + 1);
  for (int i = 0; i < k; ++i) {
    std::size_t total = 0;
    for (auto v : confusion[static_cast<std::size_t>(i)]) total += v;
    for (int j = 0; j < k; ++j) {
      const double f = total ? static_cast<double>(confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) /
                                   static_cast<double>(total)
                             : 0.0;
      const auto mix = [f](int lo, int hi) { return static_cast<std::uint8_t>(std::lround(lo + (hi - lo) * f)); };
      img.fill_rect(j * cell_px, i * cell_px, (j + 1) * cell_px, (i + 1) * cell_px, mix(255, 8), mix(255, 48),
                    mix(255, 107));
    }
  }
  for (int t = 0; t <= k; ++t) {
    img.line(t * cell_px, 0, t * cell_px, k * cell_px, 160, 160, 160);
    img.line(0, t * cell_px, k * cell_px, t * cell_px, 160, 160, 160);
  }
  for (int i = 0; i < k; ++i) {
    const int x0 = i * cell_px, x1 = (i + 1) * cell_px;
    img.line(x0, x0, x1, x0, 230, 120, 0);
    img.line(x0, x1, x1, x1, 230, 120, 0);
    img.line(x0, x0, x0, x1, 230, 120, 0);
    img.line(x1, x0, x1, x1, 230, 120, 0);
  }
  return img;
}

Image render_curves(std::span<const PlotSeries> series, int width, int height) {
  require(!series.empty(), "no series to plot");
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size() && !s.x.empty(), "series x/y must be non-empty and equal length");
    require(s.error.empty() || s.error.size() == s.y.size(), "series error bars must match y");
    for (double x : s.x) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  Image img(width, height);
  const int left = 40, right = width - 20, top = 20, bottom = height - 30;
  const auto px = [&](double x) { return left + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (right - left))); };
  const auto py = [&](double y) {
    return bottom - static_cast<int>(std::lround(std::clamp(y, 0.0, 1.0) * (bottom - top)));
  };
  for (int t = 0; t <= 10; ++t) img.line(left, py(t / 10.0), right, py(t / 10.0), 225, 225, 225);
  img.line(left, top, left, bottom, 0, 0, 0);
  img.line(left, bottom, right, bottom, 0, 0, 0);
  for (const auto& s : series) {
    for (double x : s.x) img.line(px(x), bottom, px(x), bottom + 5, 0, 0, 0);
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& c = kPalette[k % kPalette.size()];
    const auto& s = series[k];
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const int x = px(s.x[i]), y = py(s.y[i]);
      if (i + 1 < s.x.size()) img.line(x, y, px(s.x[i + 1]), py(s.y[i + 1]), c[0], c[1], c[2]);
      if (!s.error.empty()) {
        const int y0 = py(s.y[i] - s.error[i]), y1 = py(s.y[i] + s.error[i]);
        img.line(x, y0, x, y1, c[0], c[1], c[2]);
        img.line(x - 3, y0, x + 3, y0, c[0], c[1], c[2]);
        img.line(x - 3, y1, x + 3, y1, c[0], c[1], c[2]);
      }
      img.fill_rect(x - 3, y - 3, x + 4, y + 4, c[0], c[1], c[2]);
    }
  }
  return img;
}

}  // namespace pressure_id
