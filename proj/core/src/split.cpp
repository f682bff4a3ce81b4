#include "pressure_id/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "pressure_id/errors.hpp"

namespace pressure_id {

std::string MPnSSpec::label() const {
  return std::to_string(postures) + "P" + std::to_string(samples) + "S";
}

SplitResult split_mpns(const Dataset& dataset, const MPnSSpec& spec) {
  const auto& m = dataset.manifest;
  require(spec.postures >= 1 && spec.postures <= m.posture_count,
          "m = " + std::to_string(spec.postures) + " must lie in [1, " + std::to_string(m.posture_count) + "]");
  require(spec.samples >= 1 && spec.samples <= m.samples_per_subject_posture,
          "n = " + std::to_string(spec.samples) + " must lie in [1, " +
              std::to_string(m.samples_per_subject_posture) + "]");
  require(spec.val_fraction > 0.0 && spec.val_fraction < 1.0, "val_fraction must lie in (0, 1)");
  require(!(spec.postures == m.posture_count && spec.samples == m.samples_per_subject_posture),
          "split " + spec.label() + " uses every sample for training; nothing is left to test on");

  std::mt19937_64 rng(spec.split_seed);

  std::vector<int> postures(static_cast<std::size_t>(m.posture_count));
  std::iota(postures.begin(), postures.end(), 0);
  std::shuffle(postures.begin(), postures.end(), rng);
  postures.resize(static_cast<std::size_t>(spec.postures));
  std::sort(postures.begin(), postures.end());
  std::vector<char> chosen(static_cast<std::size_t>(m.posture_count), 0);
  for (int p : postures) chosen[static_cast<std::size_t>(p)] = 1;

  // Ordered map keeps group traversal independent of record order.
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    groups[{r.subject_id, r.posture_id}].push_back(i);
  }

  SplitResult out;
  out.spec = spec;
  out.train_postures = postures;
  for (auto& [key, members] : groups) {
    std::shuffle(members.begin(), members.end(), rng);
    std::size_t first_pool = 0;
    if (chosen[static_cast<std::size_t>(key.second)]) {
      require(members.size() >= static_cast<std::size_t>(spec.samples),
              "group (subject " + std::to_string(key.first) + ", posture " + std::to_string(key.second) +
                  ") has fewer than n samples");
      first_pool = static_cast<std::size_t>(spec.samples);
      out.train.insert(out.train.end(), members.begin(), members.begin() + spec.samples);
    }
    const std::size_t pool = members.size() - first_pool;
    if (pool == 0) continue;
    auto n_val = static_cast<std::size_t>(std::llround(spec.val_fraction * static_cast<double>(pool)));
    n_val = std::min(n_val, pool - 1);
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(first_pool),
                   members.begin() + static_cast<std::ptrdiff_t>(first_pool + n_val));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(first_pool + n_val),
                    members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::string split_to_json(const SplitResult& split) {
  nlohmann::ordered_json j;
  j["spec"] = {{"m", split.spec.postures},
               {"n", split.spec.samples},
               {"split_seed", split.spec.split_seed},
               {"val_fraction", split.spec.val_fraction}};
  j["train_postures"] = split.train_postures;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  return j.dump() + "\n";
}

SplitResult split_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SplitResult s;
    const auto& spec = j.at("spec");
    s.spec.postures = spec.at("m").get<int>();
    s.spec.samples = spec.at("n").get<int>();
    s.spec.split_seed = spec.at("split_seed").get<std::uint64_t>();
    s.spec.val_fraction = spec.at("val_fraction").get<double>();
    s.train_postures = j.at("train_postures").get<std::vector<int>>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.val = j.at("val").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed split file: ") + e.what());
  }
}

void save_split(const SplitResult& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << split_to_json(split);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

SplitResult load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return split_from_json(ss.str());
}

}  // namespace pressure_id
