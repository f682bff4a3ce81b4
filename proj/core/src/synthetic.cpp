#include "pressure_id/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pressure_id/errors.hpp"
#include "pressure_id/rng.hpp"

namespace pressure_id {
namespace {

constexpr double kAnchorCol = (kFrameCols - 1) / 2.0;

double anchor_row(Layout layout) { return layout == Layout::chair ? 40.0 : 28.0; }

// Stream ids keep subject draws independent of the layout and of each other.
constexpr std::uint64_t kSubjectStream = 0x5u;

std::vector<PostureTemplate> make_chair_templates() {
  // row, col, sigma_row, sigma_col, angle, weight
  return {
      {"upright",
       {{47, 14, 3.5, 3, 0, 1.0}, {47, 25, 3.5, 3, 0, 1.0}, {36, 13, 5, 3, 0, 0.7},
        {36, 26, 5, 3, 0, 0.7}, {12, 19.5, 5, 7, 0, 0.35}}},
      {"recline",
       {{49, 14, 3, 3, 0, 0.8}, {49, 25, 3, 3, 0, 0.8}, {37, 13, 5, 3, 0, 0.5},
        {37, 26, 5, 3, 0, 0.5}, {9, 19.5, 6, 8, 0, 0.8}, {20, 19.5, 3, 6, 0, 0.5}}},
      {"lean_forward",
       {{44, 14, 3.5, 3, 0, 1.1}, {44, 25, 3.5, 3, 0, 1.1}, {34, 13, 6, 3.5, 0, 0.9},
        {34, 26, 6, 3.5, 0, 0.9}}},
      {"lean_left",
       {{47, 13, 3.5, 3.5, 0, 1.4}, {47, 25, 3, 3, 0, 0.6}, {36, 13, 5, 3, 0, 0.8},
        {36, 26, 5, 3, 0, 0.4}, {38, 1.5, 5, 1.5, 0, 0.5}}},
      {"lean_right",
       {{47, 26, 3.5, 3.5, 0, 1.4}, {47, 14, 3, 3, 0, 0.6}, {36, 26, 5, 3, 0, 0.8},
        {36, 13, 5, 3, 0, 0.4}, {38, 37.5, 5, 1.5, 0, 0.5}}},
      {"cross_left",
       {{47, 15, 3.5, 3, 0, 0.9}, {47, 25, 3.5, 3, 0, 1.1}, {36, 24, 5, 3.5, -15, 0.9},
        {38, 19, 4, 3, 30, 0.4}}},
      {"cross_right",
       {{47, 24, 3.5, 3, 0, 0.9}, {47, 14, 3.5, 3, 0, 1.1}, {36, 15, 5, 3.5, 15, 0.9},
        {38, 20, 4, 3, -30, 0.4}}},
      {"arms_rested",
       {{47, 14, 3.5, 3, 0, 1.0}, {47, 25, 3.5, 3, 0, 1.0}, {36, 13, 5, 3, 0, 0.7},
        {36, 26, 5, 3, 0, 0.7}, {40, 1.5, 5, 1.5, 0, 0.4}, {40, 37.5, 5, 1.5, 0, 0.4}}},
      {"slouch",
       {{40, 14, 3.5, 3, 0, 0.9}, {40, 25, 3.5, 3, 0, 0.9}, {31, 13, 4, 3, 0, 0.5},
        {31, 26, 4, 3, 0, 0.5}, {22, 19.5, 2, 7, 0, 0.8}}},
      {"edge_perch",
       {{32, 14, 3, 3.5, 0, 1.0}, {32, 25, 3, 3.5, 0, 1.0}, {29, 13, 2, 3, 0, 0.4},
        {29, 26, 2, 3, 0, 0.4}}},
      {"sideways",
       {{46, 17, 4, 3, 35, 1.0}, {43, 26, 4, 3, 35, 1.0}, {36, 30, 5, 3, 60, 0.6},
        {33, 23, 5, 3, 60, 0.6}}},
      {"one_leg_raised",
       {{47, 14, 3.5, 3, 0, 1.0}, {47, 25, 3.5, 3, 0, 1.2}, {36, 13, 5, 3, 0, 0.8},
        {12, 19.5, 5, 7, 0, 0.3}}},
  };
}

std::vector<PostureTemplate> make_bed_templates() {
  return {
      {"supine",
       {{5, 19.5, 2.5, 3, 0, 0.4}, {14, 19.5, 3, 9, 0, 0.9}, {28, 19.5, 4, 6, 0, 1.2},
        {50, 16, 2, 1.5, 0, 0.25}, {50, 23, 2, 1.5, 0, 0.25}}},
      {"prone",
       {{5, 19.5, 2, 3, 0, 0.3}, {15, 19.5, 4, 9, 0, 1.0}, {28, 19.5, 4, 7, 0, 0.9},
        {40, 16, 2.5, 2, 0, 0.4}, {40, 23, 2.5, 2, 0, 0.4}, {52, 19.5, 1.5, 5, 0, 0.2}}},
      {"side_left",
       {{5, 12, 2.5, 2.5, 0, 0.4}, {14, 12, 4, 3, 0, 1.0}, {29, 13, 5, 3.5, 0, 1.3},
        {40, 15, 3, 2.5, 0, 0.5}, {51, 15, 2, 2, 0, 0.25}}},
      {"side_right",
       {{5, 27, 2.5, 2.5, 0, 0.4}, {14, 27, 4, 3, 0, 1.0}, {29, 26, 5, 3.5, 0, 1.3},
        {40, 24, 3, 2.5, 0, 0.5}, {51, 24, 2, 2, 0, 0.25}}},
      {"fetal",
       {{7, 14, 2.5, 2.5, 0, 0.4}, {15, 13, 4, 3, 0, 1.0}, {28, 17, 5, 4, 0, 1.3},
        {33, 27, 3, 3, 20, 0.6}, {40, 21, 2, 2.5, 0, 0.3}}},
      {"starfish",
       {{5, 19.5, 2.5, 3, 0, 0.4}, {14, 19.5, 3, 9, 0, 0.9}, {18, 4, 5, 1.5, -20, 0.2},
        {18, 35, 5, 1.5, 20, 0.2}, {28, 19.5, 4, 6, 0, 1.2}, {50, 19.5, 2, 12, 0, 0.4}}},
  };
}

void render_blob(std::vector<double>& field, const ContactBlob& blob) {
  const double theta = blob.angle_deg * std::numbers::pi / 180.0;
  const double ct = std::cos(theta), st = std::sin(theta);
  const double inv_r = 1.0 / (blob.sigma_row * blob.sigma_row);
  const double inv_c = 1.0 / (blob.sigma_col * blob.sigma_col);
  for (int r = 0; r < kFrameRows; ++r) {
    for (int c = 0; c < kFrameCols; ++c) {
      const double dr = r - blob.row, dc = c - blob.col;
      const double u = dr * ct + dc * st;
      const double v = -dr * st + dc * ct;
      const double q = u * u * inv_r + v * v * inv_c;
      if (q < 32.0) field[PressureFrame::index(r, c)] += blob.weight * std::exp(-0.5 * q);
    }
  }
}

ContactBlob personalise(const ContactBlob& b, const SubjectProfile& s, double anchor_r) {
  ContactBlob out = b;
  out.row = anchor_r + (b.row - anchor_r) * s.length_scale;
  out.col = kAnchorCol + (b.col - kAnchorCol) * s.width_scale;
  out.sigma_row = b.sigma_row * s.length_scale;
  out.sigma_col = b.sigma_col * s.width_scale;
  out.weight = b.weight * (1.0 + s.asymmetry * std::tanh((kAnchorCol - b.col) / 4.0));
  return out;
}

}  // namespace

std::string_view to_string(Layout layout) { return layout == Layout::chair ? "chair" : "bed"; }

const std::vector<PostureTemplate>& posture_templates(Layout layout) {
  static const auto chair = make_chair_templates();
  static const auto bed = make_bed_templates();
  return layout == Layout::chair ? chair : bed;
}

bool is_sensing_cell(Layout layout, int row, int col) {
  if (layout == Layout::bed) return true;
  const bool backrest = row <= 24 && col >= 6 && col <= 33;
  const bool cushion = row >= 27 && col >= 6 && col <= 33;
  const bool left_arm = row >= 27 && col <= 3;
  const bool right_arm = row >= 27 && col >= 36;
  return backrest || cushion || left_arm || right_arm;
}

std::vector<SubjectProfile> subject_profiles(const SyntheticConfig& config) {
  std::vector<SubjectProfile> out;
  out.reserve(static_cast<std::size_t>(std::max(config.subject_count, 0)));
  const double sep = config.separability;
  for (int s = 0; s < config.subject_count; ++s) {
    auto rng = make_rng(config.seed, kSubjectStream, static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SubjectProfile p;
    p.load = 100.0 * (1.0 + 0.3 * sep * u(rng));
    p.width_scale = 1.0 + 0.12 * sep * u(rng);
    p.length_scale = 1.0 + 0.10 * sep * u(rng);
    p.asymmetry = 0.2 * sep * u(rng);
    out.push_back(p);
  }
  return out;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  require(config.noise_scale >= 0.0 && std::isfinite(config.noise_scale), "noise_scale must be >= 0");
  require(config.jitter_px >= 0, "jitter_px must be >= 0");
  require(config.separability > 0.0 && config.separability <= 1.0, "separability must lie in (0, 1]");
  require(config.subject_count >= 0 && config.posture_count >= 0 && config.samples_per_subject_posture >= 0,
          "synthetic counts must be non-negative");
  const auto& templates = posture_templates(config.layout);
  require(config.posture_count <= static_cast<int>(templates.size()),
          std::string(to_string(config.layout)) + " layout has only " + std::to_string(templates.size()) +
              " posture templates");

  Dataset ds;
  ds.manifest.name = config.name;
  ds.manifest.generator_seed = config.seed;
  const bool empty = config.subject_count == 0 || config.posture_count == 0 ||
                     config.samples_per_subject_posture == 0;
  if (empty) return ds;
  ds.manifest.subject_count = config.subject_count;
  ds.manifest.posture_count = config.posture_count;
  ds.manifest.samples_per_subject_posture = config.samples_per_subject_posture;

  const auto profiles = subject_profiles(config);
  const double anchor_r = anchor_row(config.layout);
  const double ns = config.noise_scale;
  std::vector<double> field(kFrameCells);
  ds.records.reserve(ds.manifest.expected_record_count());

  for (int s = 0; s < config.subject_count; ++s) {
    for (int p = 0; p < config.posture_count; ++p) {
      auto rng = make_rng(config.seed, 0x100u + static_cast<std::uint64_t>(config.layout),
                             static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(p));
      std::uniform_int_distribution<int> jitter(-config.jitter_px, config.jitter_px);
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      std::normal_distribution<double> normal(0.0, 1.0);

      for (int k = 0; k < config.samples_per_subject_posture; ++k) {
        const int dr = jitter(rng), dc = jitter(rng);
        std::fill(field.begin(), field.end(), 0.0);
        for (const auto& tb : templates[static_cast<std::size_t>(p)].blobs) {
          ContactBlob b = personalise(tb, profiles[static_cast<std::size_t>(s)], anchor_r);
          b.row += dr;
          b.col += dc;
          b.weight *= std::max(0.1, 1.0 + ns * normal(rng));
          render_blob(field, b);
        }
        double mass = 0.0;
        double peak = 0.0;
        for (int r = 0; r < kFrameRows; ++r)
          for (int c = 0; c < kFrameCols; ++c) {
            auto& v = field[PressureFrame::index(r, c)];
            if (!is_sensing_cell(config.layout, r, c)) v = 0.0;
            mass += v;
            peak = std::max(peak, v);
          }
        const double total = profiles[static_cast<std::size_t>(s)].load * (1.0 + ns * uniform(rng));
        std::vector<float> values(kFrameCells, 0.0f);
        if (mass > 0.0) {
          const double scale = total / mass;
          const double threshold = 0.02 * peak;
          std::size_t contact = 0;
          for (double v : field) contact += v > threshold ? 1 : 0;
          const double sigma = ns * total / static_cast<double>(std::max<std::size_t>(contact, 1));
          for (std::size_t i = 0; i < kFrameCells; ++i) {
            double v = field[i] * scale;
            if (field[i] > threshold) v += sigma * normal(rng);
            values[i] = static_cast<float>(std::max(0.0, v));
          }
        } else {
          // Every blob fell into dead cells; keep the load on the anchor cell.
          values[PressureFrame::index(static_cast<int>(anchor_r), static_cast<int>(kAnchorCol))] =
              static_cast<float>(total);
        }
        ds.records.push_back({PressureFrame(std::move(values)), s, p, config.device});
      }
    }
  }
  return ds;
}

SyntheticConfig synthetic_preset(std::string_view preset, std::uint64_t seed) {
  SyntheticConfig c;
  c.seed = seed;
  c.subject_count = 8;
  c.samples_per_subject_posture = 100;
  if (preset == "chr-syn") {
    c.name = "chr-syn";
    c.layout = Layout::chair;
    c.device = Device::target;
    c.posture_count = 12;
  } else if (preset == "bed-syn") {
    c.name = "bed-syn";
    c.layout = Layout::bed;
    c.device = Device::auxiliary;
    c.posture_count = 6;
  } else {
    throw ValidationError("unknown preset '" + std::string(preset) + "' (expected chr-syn or bed-syn)");
  }
  return c;
}

}  // namespace pressure_id
