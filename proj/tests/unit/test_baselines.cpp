#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pressure_id/baselines.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/split.hpp"

using namespace pressure_id;

namespace {

struct Splits {
  Dataset target = oracle::small_dataset(8, 4, 20, 31);
  SplitResult split;
  DataView train, val, test;

  Splits() {
    split = split_mpns(target, {2, 10, 31, 0.2});
    train = DataView::of(target, split.train);
    val = DataView::of(target, split.val);
    test = DataView::of(target, split.test);
  }
};

TrainConfig quick_config(int epochs = 3) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.model.encoder = {EncoderVariant::tiny, 16};
  c.seed = 2;
  return c;
}

PressureFrame spike(int row, int col, float v = 1.0f) {
  PressureFrame f;
  f.at(row, col) = v;
  return f;
}

}  // namespace

TEST_CASE("knn agrees with a linear scan") {
  Splits s;
  for (int k : {1, 3, 5, 7}) {
    for (std::size_t q = 0; q < s.test.size(); q += 13)
      CHECK(knn_classify(s.train, s.test[q].frame.values(), k) == oracle::knn(s.train, s.test[q].frame.values(), k));
  }
}

TEST_CASE("knn with an exact match and k = 1") {
  Splits s;
  for (std::size_t i = 0; i < s.train.size(); i += 17)
    CHECK(knn_classify(s.train, s.train[i].frame.values(), 1) == s.train[i].subject_id);
}

TEST_CASE("knn vote ties use mean distance, then class id") {
  Dataset ds;
  ds.records = {{spike(0, 0, 1.0f), 0, 0, Device::target},
                {spike(0, 1, 1.0f), 0, 0, Device::target},
                {spike(0, 2, 2.0f), 1, 0, Device::target},
                {spike(0, 3, 2.0f), 1, 0, Device::target}};
  const auto all = DataView::all(ds);
  const PressureFrame zero;
  CHECK(knn_classify(all, zero.values(), 4) == 0);

  Dataset sym;
  sym.records = {{spike(0, 0), 1, 0, Device::target}, {spike(0, 1), 0, 0, Device::target}};
  CHECK(knn_classify(DataView::all(sym), zero.values(), 2) == 0);
}

TEST_CASE("knn argument checks") {
  Splits s;
  CHECK_THROWS_AS(knn_classify(s.train, s.test[0].frame.values(), static_cast<int>(s.train.size()) + 1),
                  ValidationError);
  CHECK_THROWS_AS(run_knn(s.train, DataView{}, 3), ValidationError);
  BaselineSpec spec{BaselineKind::knn, 4, 0};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec.k = 5;
  CHECK_NOTHROW(spec.validate());
  CHECK(baseline_kind_from_string("trans") == BaselineKind::trans);
  CHECK_THROWS_AS(baseline_kind_from_string("gan"), ValidationError);
}

TEST_CASE("nil separates identical per-class frames") {
  Dataset ds;
  ds.manifest = {"blocks", 8, 1, 2};
  for (int s = 0; s < 8; ++s) {
    PressureFrame f;
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) f.at(6 * s + r, 2 + 4 * (s % 2) + c) = 1.0f;
    ds.records.push_back({f, s, 0, Device::target});
    ds.records.push_back({f, s, 0, Device::target});
  }
  const auto all = DataView::all(ds);
  auto c = quick_config(150);
  c.batch_size = 8;
  const auto r = run_nil(all, all, all, c);
  CHECK(r.accuracy == 1.0);
}

TEST_CASE("aug is the single-branch objective with augmentation") {
  Splits s;
  auto c = quick_config();
  const auto a = run_aug(s.train, s.val, s.test, c);
  auto reduced = c;
  reduced.weights = {c.weights.target_ce, 0.0, 0.0};
  reduced.augment_enabled = true;
  const auto b = train(s.train, s.val, nullptr, reduced);
  CHECK(a.history.to_csv() == b.history.to_csv());
  CHECK(a.accuracy == accuracy(b.models.target, s.test));
}

TEST_CASE("nil and aug differ only in augmentation") {
  Splits s;
  const auto nil = run_nil(s.train, s.val, s.test, quick_config());
  const auto aug = run_aug(s.train, s.val, s.test, quick_config());
  CHECK(nil.history.to_csv() != aug.history.to_csv());
  for (const auto& e : nil.history.epochs) CHECK(e.lcon == 0.0);
}

TEST_CASE("recon without pretraining is nil") {
  Splits s;
  const auto c = quick_config();
  const auto recon = run_recon(s.train, s.val, s.test, c, 0);
  const auto nil = run_nil(s.train, s.val, s.test, c);
  CHECK(recon.baseline.history.to_csv() == nil.history.to_csv());
  CHECK(recon.baseline.accuracy == nil.accuracy);
  CHECK(recon.pretraining.losses.empty());
}

TEST_CASE("reconstruction pretraining") {
  Splits s;
  auto c = quick_config();
  auto pair = init_model(c.model, c.seed);
  const auto pre = pretrain_autoencoder(pair.target.encoder(), s.train, c, 20);
  REQUIRE(pre.losses.size() == 20);
  for (std::size_t i = 1; i < 5; ++i) CHECK(pre.losses[i] < pre.losses[i - 1]);

  const std::vector<PressureFrame> zero(1);
  const Tensor out = reconstruct(pair.target.encoder(), pre.decoder, zero, c.model.input_scale);
  CHECK(out.h() == kFrameRows);
  CHECK(out.w() == kFrameCols);
  double mean_abs = 0.0;
  for (double v : out.span()) mean_abs += std::abs(v);
  mean_abs /= static_cast<double>(out.size());
  CHECK(mean_abs < 1e-2);
}

TEST_CASE("trans pretraining and fine-tuning") {
  Splits s;
  const auto aux = oracle::small_dataset(8, 6, 20, 31, Layout::bed);
  const auto aux_view = DataView::all(aux);
  auto c = quick_config(0);
  const auto frozen = run_trans(s.train, s.val, s.test, aux_view, c, 30);
  CHECK(frozen.pretrain_accuracy > 0.8);
  CHECK(frozen.baseline.accuracy <= 0.3);
  CHECK(frozen.baseline.history.epochs.empty());

  c.epochs = 2;
  const auto a = run_trans(s.train, s.val, s.test, aux_view, c, 2);
  const auto b = run_trans(s.train, s.val, s.test, aux_view, c, 2);
  CHECK(a.baseline.history.to_csv() == b.baseline.history.to_csv());
  CHECK(a.baseline.accuracy == b.baseline.accuracy);
  CHECK(a.pretrain_accuracy == b.pretrain_accuracy);
}
