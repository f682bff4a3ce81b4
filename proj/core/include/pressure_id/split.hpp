#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pressure_id/dataset.hpp"

namespace pressure_id {

/// Training budget: m postures per subject, n samples per chosen posture.
struct MPnSSpec {
  int postures = 2;
  int samples = 50;
  std::uint64_t split_seed = 0;
  double val_fraction = 0.2;

  /// "2P50S" style label.
  std::string label() const;
  friend bool operator==(const MPnSSpec&, const MPnSSpec&) = default;
};

/// Disjoint record indices into the dataset the split was drawn from.
struct SplitResult {
  MPnSSpec spec;
  std::vector<int> train_postures;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

/// The same m postures (drawn from the seed) are used for every subject; n samples
/// of each (subject, chosen posture) go to train. Everything else is the held-out
/// pool, partitioned into val/test per (subject, posture) so every group keeps at
/// least one test sample.
SplitResult split_mpns(const Dataset& dataset, const MPnSSpec& spec);

std::string split_to_json(const SplitResult& split);
SplitResult split_from_json(std::string_view text);
void save_split(const SplitResult& split, const std::filesystem::path& path);
SplitResult load_split(const std::filesystem::path& path);

}  // namespace pressure_id
