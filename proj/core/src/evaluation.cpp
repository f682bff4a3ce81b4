#include "pressure_id/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/trainer.hpp"

namespace pressure_id {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::ordered_json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

double number_or_nan(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string fixed4(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

RunReport make_report(std::string method, const MPnSSpec& spec, std::uint64_t seed, int class_count,
                      std::span<const int> predicted, std::span<const int> truth, std::span<const int> postures,
                      std::span<const int> train_postures) {
  require(!truth.empty(), "evaluate: empty test split");
  require(predicted.size() == truth.size() && postures.size() == truth.size(),
          "evaluate: predictions, labels and postures must have equal length");
  require(class_count >= 1, "evaluate: class_count must be positive");

  RunReport r;
  r.method = std::move(method);
  r.spec = spec;
  r.seed = seed;
  r.class_count = class_count;
  r.test_count = truth.size();
  const auto k = static_cast<std::size_t>(class_count);
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));

  std::map<int, PostureAccuracy> by_posture;
  std::size_t correct = 0, seen_total = 0, seen_correct = 0, unseen_total = 0, unseen_correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < class_count && predicted[i] >= 0 && predicted[i] < class_count,
            "evaluate: label or prediction out of range");
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    const bool hit = truth[i] == predicted[i];
    correct += hit ? 1 : 0;
    auto& pa = by_posture[postures[i]];
    pa.posture_id = postures[i];
    pa.seen_in_training = std::find(train_postures.begin(), train_postures.end(), postures[i]) != train_postures.end();
    ++pa.total;
    pa.correct += hit ? 1 : 0;
    (pa.seen_in_training ? seen_total : unseen_total) += 1;
    (pa.seen_in_training ? seen_correct : unseen_correct) += hit ? 1 : 0;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t row = 0;
    for (auto v : r.confusion[c]) row += v;
    r.per_subject_accuracy.push_back(row == 0 ? kNaN : static_cast<double>(r.confusion[c][c]) / static_cast<double>(row));
  }
  for (auto& [id, pa] : by_posture) {
    pa.accuracy = static_cast<double>(pa.correct) / static_cast<double>(pa.total);
    r.per_posture.push_back(pa);
  }
  r.seen_posture_accuracy = seen_total ? static_cast<double>(seen_correct) / static_cast<double>(seen_total) : kNaN;
  r.unseen_posture_accuracy =
      unseen_total ? static_cast<double>(unseen_correct) / static_cast<double>(unseen_total) : kNaN;
  return r;
}

RunReport evaluate(const BranchModel& model, const DataView& test, std::string method, const SplitResult& split,
                   std::uint64_t seed) {
  require(!test.empty(), "evaluate: empty test split");
  const auto predicted = predict(model, test);
  const auto truth = test.labels();
  std::vector<int> postures;
  postures.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) postures.push_back(test[i].posture_id);
  return make_report(std::move(method), split.spec, seed, model.config().class_count, predicted, truth, postures,
                     split.train_postures);
}

std::pair<double, double> mean_and_stddev(std::span<const double> values) {
  require(!values.empty(), "mean_and_stddev: no values");
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

AggregateReport aggregate(std::span<const RunReport> reports) {
  require(!reports.empty(), "aggregate: no reports");
  AggregateReport a;
  a.method = reports.front().method;
  a.setting = reports.front().spec.label();
  for (const auto& r : reports) {
    require(r.method == a.method, "aggregate: mixed methods '" + a.method + "' and '" + r.method + "'");
    require(r.spec.label() == a.setting, "aggregate: mixed settings " + a.setting + " and " + r.spec.label());
    a.accuracies.push_back(r.accuracy);
  }
  a.runs = reports.size();
  const auto [mean, sd] = mean_and_stddev(a.accuracies);
  a.mean = mean;
  a.stddev = sd;
  return a;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["setting"] = r.spec.label();
  j["spec"] = {{"m", r.spec.postures},
               {"n", r.spec.samples},
               {"split_seed", r.spec.split_seed},
               {"val_fraction", r.spec.val_fraction}};
  j["seed"] = r.seed;
  j["class_count"] = r.class_count;
  j["test_count"] = r.test_count;
  j["accuracy"] = r.accuracy;
  j["seen_posture_accuracy"] = number_or_null(r.seen_posture_accuracy);
  j["unseen_posture_accuracy"] = number_or_null(r.unseen_posture_accuracy);
  j["best_epoch"] = r.best_epoch;
  auto subj = nlohmann::ordered_json::array();
  for (double v : r.per_subject_accuracy) subj.push_back(number_or_null(v));
  j["per_subject_accuracy"] = subj;
  j["confusion"] = r.confusion;
  auto postures = nlohmann::ordered_json::array();
  for (const auto& p : r.per_posture)
    postures.push_back({{"posture_id", p.posture_id},
                        {"seen_in_training", p.seen_in_training},
                        {"correct", p.correct},
                        {"total", p.total},
                        {"accuracy", p.accuracy}});
  j["per_posture"] = postures;
  return j.dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunReport r;
    r.method = j.at("method").get<std::string>();
    const auto& spec = j.at("spec");
    r.spec.postures = spec.at("m").get<int>();
    r.spec.samples = spec.at("n").get<int>();
    r.spec.split_seed = spec.at("split_seed").get<std::uint64_t>();
    r.spec.val_fraction = spec.at("val_fraction").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.class_count = j.at("class_count").get<int>();
    r.test_count = j.at("test_count").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.seen_posture_accuracy = number_or_nan(j.at("seen_posture_accuracy"));
    r.unseen_posture_accuracy = number_or_nan(j.at("unseen_posture_accuracy"));
    r.best_epoch = j.value("best_epoch", 0);
    for (const auto& v : j.at("per_subject_accuracy")) r.per_subject_accuracy.push_back(number_or_nan(v));
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& p : j.at("per_posture")) {
      PostureAccuracy pa;
      pa.posture_id = p.at("posture_id").get<int>();
      pa.seen_in_training = p.at("seen_in_training").get<bool>();
      pa.correct = p.at("correct").get<std::size_t>();
      pa.total = p.at("total").get<std::size_t>();
      pa.accuracy = p.at("accuracy").get<double>();
      r.per_posture.push_back(pa);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run report: ") + e.what());
  }
}

std::string aggregate_to_json(const AggregateReport& a) {
  nlohmann::ordered_json j;
  j["method"] = a.method;
  j["setting"] = a.setting;
  j["runs"] = a.runs;
  j["mean"] = a.mean;
  j["stddev"] = a.stddev;
  j["accuracies"] = a.accuracies;
  return j.dump(2) + "\n";
}

std::string summary_table_markdown(std::span<const AggregateReport> rows) {
  std::size_t columns = 0;
  for (const auto& r : rows) columns = std::max(columns, r.accuracies.size());
  std::ostringstream os;
  os << "| Method | Setting |";
  for (std::size_t i = 1; i <= columns; ++i) os << ' ' << i << " |";
  os << " avg |\n|---|---|";
  for (std::size_t i = 0; i < columns; ++i) os << "---|";
  os << "---|\n";
  for (const auto& r : rows) {
    os << "| " << r.method << " | " << r.setting << " |";
    for (std::size_t i = 0; i < columns; ++i) os << ' ' << (i < r.accuracies.size() ? fixed4(r.accuracies[i]) : "") << " |";
    os << ' ' << fixed4(r.mean) << "±" << fixed4(r.stddev) << " |\n";
  }
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pressure_id
