#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pressure_id/dataset.hpp"

namespace pressure_id {

/// Sensor layout being imitated. The chair is four panels (backrest, cushion,
/// two armrests) pieced into one 56x40 grid with dead gutters between them;
/// the bed is one continuous array.
enum class Layout { chair, bed };

std::string_view to_string(Layout layout);

/// One elliptical Gaussian contact region, in grid coordinates.
struct ContactBlob {
  double row;
  double col;
  double sigma_row;
  double sigma_col;
  double angle_deg;
  double weight;
};

struct PostureTemplate {
  std::string name;
  std::vector<ContactBlob> blobs;
};

/// Fixed posture tables: 12 for the chair, 6 for the bed.
const std::vector<PostureTemplate>& posture_templates(Layout layout);

/// True for cells that carry a sensor in the given layout.
bool is_sensing_cell(Layout layout, int row, int col);

struct SyntheticConfig {
  std::string name = "synthetic";
  Layout layout = Layout::chair;
  Device device = Device::target;
  int subject_count = 8;
  int posture_count = 12;
  int samples_per_subject_posture = 100;
  std::uint64_t seed = 42;
  double noise_scale = 0.05;
  int jitter_px = 2;
  double separability = 1.0;
};

/// Latent body parameters of one subject. Depend only on (seed, separability,
/// subject index), so datasets generated with the same seed share subjects
/// across layouts.
struct SubjectProfile {
  double load;
  double width_scale;
  double length_scale;
  double asymmetry;
};

std::vector<SubjectProfile> subject_profiles(const SyntheticConfig& config);

/// Deterministic in `config`. Records are ordered by (subject, posture, sample).
Dataset generate_synthetic(const SyntheticConfig& config);

/// "chr-syn": chair, 8 subjects x 12 postures x 100 samples, target device.
/// "bed-syn": bed, 8 subjects x 6 postures x 100 samples, auxiliary device.
SyntheticConfig synthetic_preset(std::string_view preset, std::uint64_t seed);

}  // namespace pressure_id
