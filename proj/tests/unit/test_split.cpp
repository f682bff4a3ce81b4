#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/split.hpp"
#include "temp_dir.hpp"

using namespace pressure_id;

namespace {

const Dataset& chair() {
  static const Dataset ds = oracle::small_dataset(8, 12, 100, 42);
  return ds;
}

}  // namespace

TEST_CASE("2P50S sizes and coverage") {
  MPnSSpec spec;
  spec.split_seed = 3;
  const auto s = split_mpns(chair(), spec);
  CHECK(spec.label() == "2P50S");
  CHECK(s.train.size() == 800);
  CHECK(s.train_postures.size() == 2);
  CHECK(s.train.size() + s.val.size() + s.test.size() == chair().records.size());

  std::set<int> test_postures;
  for (auto i : s.test) test_postures.insert(chair().records[i].posture_id);
  CHECK(test_postures.size() == 12);
}

TEST_CASE("splits are disjoint and every group is tested") {
  for (int m : {1, 3, 12}) {
    for (int n : {1, 30, 99}) {
      MPnSSpec spec{m, n, 17, 0.2};
      const auto s = split_mpns(chair(), spec);
      std::vector<std::size_t> all = s.train;
      all.insert(all.end(), s.val.begin(), s.val.end());
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      CHECK(all.size() == chair().records.size());

      std::map<std::pair<int, int>, int> tested;
      for (auto i : s.test) ++tested[{chair().records[i].subject_id, chair().records[i].posture_id}];
      CHECK(tested.size() == 8u * 12u);
    }
  }
}

TEST_CASE("every subject trains on the same postures") {
  MPnSSpec spec{4, 10, 99, 0.2};
  const auto s = split_mpns(chair(), spec);
  std::map<int, std::set<int>> per_subject;
  std::map<std::pair<int, int>, int> counts;
  for (auto i : s.train) {
    const auto& r = chair().records[i];
    per_subject[r.subject_id].insert(r.posture_id);
    ++counts[{r.subject_id, r.posture_id}];
  }
  const std::set<int> expected(s.train_postures.begin(), s.train_postures.end());
  CHECK(per_subject.size() == 8);
  for (const auto& [subject, postures] : per_subject) CHECK(postures == expected);
  for (const auto& [key, count] : counts) CHECK(count == 10);
}

TEST_CASE("split is a function of the seed") {
  MPnSSpec a{2, 50, 5, 0.2};
  CHECK(split_mpns(chair(), a) == split_mpns(chair(), a));
  MPnSSpec b = a;
  b.split_seed = 6;
  CHECK_FALSE(split_mpns(chair(), a) == split_mpns(chair(), b));
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(split_mpns(chair(), {0, 50, 1, 0.2}), ValidationError);
  CHECK_THROWS_AS(split_mpns(chair(), {13, 50, 1, 0.2}), ValidationError);
  CHECK_THROWS_AS(split_mpns(chair(), {2, 101, 1, 0.2}), ValidationError);
  CHECK_THROWS_AS(split_mpns(chair(), {12, 100, 1, 0.2}), ValidationError);
  CHECK_THROWS_AS(split_mpns(chair(), {2, 50, 1, 1.0}), ValidationError);
}

TEST_CASE("split JSON round trip") {
  testing_support::TempDir dir;
  const auto s = split_mpns(chair(), {3, 20, 8, 0.25});
  save_split(s, dir / "split.json");
  CHECK(load_split(dir / "split.json") == s);
  CHECK(split_from_json(split_to_json(s)) == s);
}
