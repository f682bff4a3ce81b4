#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pressure_id/model.hpp"
#include "pressure_id/split.hpp"

namespace pressure_id {

struct PostureAccuracy {
  int posture_id = 0;
  bool seen_in_training = false;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
};

struct RunReport {
  std::string method;
  MPnSSpec spec;
  std::uint64_t seed = 0;
  int class_count = 0;
  std::size_t test_count = 0;
  double accuracy = 0.0;
  /// NaN for subjects with no test samples.
  std::vector<double> per_subject_accuracy;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<PostureAccuracy> per_posture;
  /// Accuracy restricted to postures that were / were not in the training split
  /// (NaN when the group is empty).
  double seen_posture_accuracy = 0.0;
  double unseen_posture_accuracy = 0.0;
  /// Selected checkpoint epoch for trained methods, 0 otherwise.
  int best_epoch = 0;
};

struct AggregateReport {
  std::string method;
  std::string setting;
  std::size_t runs = 0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single run.
  double stddev = 0.0;
  std::vector<double> accuracies;
};

/// Builds a report from predictions. `postures` gives each test sample's
/// posture; `train_postures` marks which of them were seen in training.
RunReport make_report(std::string method, const MPnSSpec& spec, std::uint64_t seed, int class_count,
                      std::span<const int> predicted, std::span<const int> truth, std::span<const int> postures,
                      std::span<const int> train_postures);

/// Predicts every test sample with `model` (no augmentation) and reports.
RunReport evaluate(const BranchModel& model, const DataView& test, std::string method, const SplitResult& split,
                   std::uint64_t seed);

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_and_stddev(std::span<const double> values);

/// Mean and sample standard deviation of accuracy. All reports must share the
/// method and the mPnS setting.
AggregateReport aggregate(std::span<const RunReport> reports);

std::string report_to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);
std::string aggregate_to_json(const AggregateReport& report);

/// Markdown table with one row per method: per-run accuracies, then mean +- std.
std::string summary_table_markdown(std::span<const AggregateReport> rows);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pressure_id
