#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pressure_id/dataset.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/synthetic.hpp"
#include "temp_dir.hpp"

using namespace pressure_id;
using testing_support::TempDir;

TEST_CASE("frame rejects bad shapes and values") {
  CHECK_THROWS_AS(PressureFrame(std::vector<float>(10, 0.0f)), ValidationError);
  std::vector<float> v(kFrameCells, 0.0f);
  v[5] = -0.5f;
  CHECK_THROWS_AS(PressureFrame{v}, ValidationError);
  v[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(PressureFrame{v}, ValidationError);
  v[5] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(PressureFrame{v}, ValidationError);
  v[5] = 2.0f;
  PressureFrame f(v);
  CHECK(f.at(0, 5) == 2.0f);
  CHECK(f.total() == doctest::Approx(2.0));
  CHECK(PressureFrame::index(55, 39) == kFrameCells - 1);
}

TEST_CASE("device names") {
  CHECK(device_from_string("target") == Device::target);
  CHECK(device_from_string(to_string(Device::auxiliary)) == Device::auxiliary);
  CHECK_THROWS_AS(device_from_string("phone"), ValidationError);
}

TEST_CASE("dataset round trip is exact") {
  TempDir dir;
  const auto ds = oracle::small_dataset(3, 2, 4, 11);
  save_dataset(ds, dir / "d.prsd");
  CHECK(std::filesystem::exists(dir / "d.json"));
  const auto back = load_dataset(dir / "d.prsd");
  CHECK(back.manifest == ds.manifest);
  REQUIRE(back.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.records[i].frame == ds.records[i].frame);
    CHECK(back.records[i].subject_id == ds.records[i].subject_id);
    CHECK(back.records[i].posture_id == ds.records[i].posture_id);
    CHECK(back.records[i].device == ds.records[i].device);
  }
}

TEST_CASE("empty dataset round trip") {
  TempDir dir;
  Dataset empty;
  empty.manifest.name = "empty";
  save_dataset(empty, dir / "e.prsd");
  const auto back = load_dataset(dir / "e.prsd");
  CHECK(back.records.empty());
  CHECK(back.manifest == empty.manifest);
}

TEST_CASE("manifest is inferred when the sidecar is missing") {
  TempDir dir;
  const auto ds = oracle::small_dataset(2, 3, 2, 5);
  save_dataset(ds, dir / "d.prsd");
  std::filesystem::remove(dir / "d.json");
  const auto back = load_dataset(dir / "d.prsd");
  CHECK(back.manifest.subject_count == 2);
  CHECK(back.manifest.posture_count == 3);
  CHECK(back.manifest.samples_per_subject_posture == 2);
  CHECK(back.records.size() == 12);
}

TEST_CASE("corrupt containers are rejected") {
  TempDir dir;
  const auto ds = oracle::small_dataset(2, 2, 2, 5);
  const auto path = dir / "d.prsd";
  save_dataset(ds, path);
  const auto good = testing_support::read_bytes(path);

  SUBCASE("truncated") {
    auto bytes = good;
    bytes.resize(bytes.size() - 100);
    testing_support::write_bytes(path, bytes);
    CHECK_THROWS_AS(load_dataset(path), CorruptionError);
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back(0);
    testing_support::write_bytes(path, bytes);
    CHECK_THROWS_AS(load_dataset(path), CorruptionError);
  }
  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    testing_support::write_bytes(path, bytes);
    CHECK_THROWS_AS(load_dataset(path), FormatError);
  }
  SUBCASE("unsupported version") {
    auto bytes = good;
    bytes[4] = 9;
    testing_support::write_bytes(path, bytes);
    CHECK_THROWS_AS(load_dataset(path), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset(dir / "nope.prsd"), IoError); }
}

TEST_CASE("save validates against the manifest") {
  TempDir dir;
  auto ds = oracle::small_dataset(2, 2, 2, 5);
  ds.manifest.samples_per_subject_posture = 3;
  CHECK_THROWS_AS(save_dataset(ds, dir / "d.prsd"), ValidationError);
  ds.manifest.samples_per_subject_posture = 2;
  ds.records[0].subject_id = 7;
  CHECK_THROWS_AS(save_dataset(ds, dir / "d.prsd"), ValidationError);
}

TEST_CASE("presets have the documented sizes") {
  const auto chr = generate_synthetic(synthetic_preset("chr-syn", 42));
  const auto bed = generate_synthetic(synthetic_preset("bed-syn", 42));
  CHECK(chr.records.size() == 9600);
  CHECK(bed.records.size() == 4800);
  CHECK(chr.manifest.posture_count == 12);
  CHECK(bed.manifest.posture_count == 6);
  CHECK(bed.records.front().device == Device::auxiliary);
  CHECK_THROWS_AS(synthetic_preset("sofa", 1), ValidationError);
}

TEST_CASE("generator is deterministic and seed-sensitive") {
  const auto a = oracle::small_dataset(3, 4, 5, 9);
  const auto b = oracle::small_dataset(3, 4, 5, 9);
  const auto c = oracle::small_dataset(3, 4, 5, 10);
  REQUIRE(a.records.size() == b.records.size());
  bool all_same = true, any_diff = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    all_same = all_same && a.records[i].frame == b.records[i].frame;
    any_diff = any_diff || !(a.records[i].frame == c.records[i].frame);
  }
  CHECK(all_same);
  CHECK(any_diff);
}

TEST_CASE("generated frames respect physical constraints") {
  SyntheticConfig cfg = synthetic_preset("chr-syn", 3);
  cfg.samples_per_subject_posture = 10;
  const auto ds = generate_synthetic(cfg);
  const auto profiles = subject_profiles(cfg);
  for (const auto& r : ds.records) {
    CHECK(r.frame.is_nonnegative());
    const double load = profiles[static_cast<std::size_t>(r.subject_id)].load;
    CHECK(std::abs(r.frame.total() - load) <= 0.10 * load);
    for (int row = 0; row < kFrameRows; ++row)
      for (int col = 0; col < kFrameCols; ++col)
        if (!is_sensing_cell(Layout::chair, row, col)) REQUIRE(r.frame.at(row, col) == 0.0f);
  }
}

TEST_CASE("records are ordered subject, posture, sample") {
  const auto ds = oracle::small_dataset(2, 3, 4, 1);
  std::size_t i = 0;
  for (int s = 0; s < 2; ++s)
    for (int p = 0; p < 3; ++p)
      for (int k = 0; k < 4; ++k, ++i) {
        CHECK(ds.records[i].subject_id == s);
        CHECK(ds.records[i].posture_id == p);
      }
}

TEST_CASE("subjects are shared across layouts for one seed") {
  auto chair = synthetic_preset("chr-syn", 8);
  auto bed = synthetic_preset("bed-syn", 8);
  const auto a = subject_profiles(chair);
  const auto b = subject_profiles(bed);
  for (std::size_t s = 0; s < a.size(); ++s) {
    CHECK(a[s].load == b[s].load);
    CHECK(a[s].width_scale == b[s].width_scale);
  }
}

TEST_CASE("generator config validation") {
  SyntheticConfig c;
  c.noise_scale = -1;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.separability = 0.0;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.layout = Layout::bed;
  c.posture_count = 7;
  CHECK_THROWS_AS(generate_synthetic(c), ValidationError);
  c = {};
  c.subject_count = 0;
  CHECK(generate_synthetic(c).records.empty());
}

TEST_CASE("lower separability shrinks subject differences") {
  auto c = synthetic_preset("chr-syn", 4);
  c.separability = 0.25;
  const auto narrow = subject_profiles(c);
  c.separability = 1.0;
  const auto wide = subject_profiles(c);
  for (std::size_t s = 0; s < wide.size(); ++s)
    CHECK(std::abs(narrow[s].load - 100.0) == doctest::Approx(0.25 * std::abs(wide[s].load - 100.0)));
}

TEST_CASE("data view accessors") {
  const auto ds = oracle::small_dataset(2, 2, 3, 1);
  const auto view = DataView::of(ds, {0, 5, 11});
  CHECK(view.size() == 3);
  CHECK(view.labels() == std::vector<int>{0, 0, 1});
  CHECK(view.frames()[1] == &ds.records[5].frame);
  CHECK_THROWS_AS(DataView::of(ds, {12}), ValidationError);
}
