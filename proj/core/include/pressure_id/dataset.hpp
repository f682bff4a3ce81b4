#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pressure_id/frame.hpp"

namespace pressure_id {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

struct DatasetManifest {
  std::string name;
  int subject_count = 0;
  int posture_count = 0;
  int samples_per_subject_posture = 0;
  int frame_rows = kFrameRows;
  int frame_cols = kFrameCols;
  std::optional<std::uint64_t> generator_seed;
  std::uint32_t format_version = kDatasetFormatVersion;

  std::size_t expected_record_count() const {
    return static_cast<std::size_t>(subject_count) * static_cast<std::size_t>(posture_count) *
           static_cast<std::size_t>(samples_per_subject_posture);
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<SampleRecord> records;
};

/// A subset of a dataset's records, addressed by index. The dataset must outlive the view.
struct DataView {
  const Dataset* dataset = nullptr;
  std::vector<std::size_t> indices;

  static DataView all(const Dataset& dataset);
  static DataView of(const Dataset& dataset, std::vector<std::size_t> indices);

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  const SampleRecord& operator[](std::size_t i) const { return dataset->records[indices[i]]; }
  std::vector<const PressureFrame*> frames() const;
  std::vector<int> labels() const;
};

/// Checks the manifest against the records: exact count match, ids in range,
/// 56x40 frames. Throws ValidationError on the first violation.
void validate_dataset(std::span<const SampleRecord> records, const DatasetManifest& manifest);

/// Writes the PRSD container to `path` and the JSON manifest next to it
/// (same stem, ".json" extension).
void save_dataset(std::span<const SampleRecord> records, const DatasetManifest& manifest,
                  const std::filesystem::path& path);
inline void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  save_dataset(dataset.records, dataset.manifest, path);
}

/// Reads a PRSD container. The sidecar manifest is used when present; otherwise
/// counts are inferred from the records. Never returns a partially read dataset.
Dataset load_dataset(const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset_path);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);

}  // namespace pressure_id
