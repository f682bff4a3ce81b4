#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/optimizer.hpp"
#include "pressure_id/trainer.hpp"

using namespace pressure_id;

namespace {

struct Fixture {
  Dataset target = oracle::small_dataset(8, 3, 6, 21);
  Dataset aux = oracle::small_dataset(8, 2, 6, 21, Layout::bed);
  DataView train_view, val_view, aux_view;

  Fixture() {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < target.records.size(); ++i) (target.records[i].posture_id == 0 ? tr : va).push_back(i);
    train_view = DataView::of(target, tr);
    val_view = DataView::of(target, va);
    aux_view = DataView::all(aux);
  }
};

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 8;
  c.model.encoder = {EncoderVariant::tiny, 8};
  c.seed = 4;
  return c;
}

std::vector<PressureFrame> frames_of(const DataView& v, std::size_t n) {
  std::vector<PressureFrame> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(v[i].frame);
  return out;
}

double grad_norm(BranchModel& m) {
  double s = 0.0;
  for (auto* p : m.parameters())
    for (double g : p->grad) s += g * g;
  return s;
}

void zero(BranchPair& pair) {
  for (auto* p : pair.target.parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  for (auto* p : pair.auxiliary.parameters()) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

}  // namespace

TEST_CASE("training is reproducible") {
  Fixture f;
  const auto c = quick_config();
  const auto a = train(f.train_view, f.val_view, &f.aux_view, c);
  const auto b = train(f.train_view, f.val_view, &f.aux_view, c);
  CHECK(a.history.to_csv() == b.history.to_csv());
  CHECK(a.history.epochs.size() == 3);
  CHECK(a.history.to_csv().rfind("epoch,lce1,lce2,lcon,total,val_acc\n", 0) == 0);
}

TEST_CASE("the selected checkpoint is the first best validation epoch") {
  Fixture f;
  auto c = quick_config();
  c.epochs = 4;
  const auto r = train(f.train_view, f.val_view, &f.aux_view, c);
  int best = 0;
  double best_acc = -1.0;
  for (const auto& e : r.history.epochs)
    if (e.val_acc > best_acc) {
      best_acc = e.val_acc;
      best = e.epoch;
    }
  CHECK(r.history.best_epoch == best);
  CHECK(r.history.best_val_acc == best_acc);
  CHECK(accuracy(r.models.target, f.val_view) == best_acc);
}

TEST_CASE("epoch losses are consistent with the weights") {
  Fixture f;
  const auto c = quick_config();
  const auto r = train(f.train_view, f.val_view, &f.aux_view, c);
  for (const auto& e : r.history.epochs) {
    CHECK(e.total == doctest::Approx(0.15 * e.lce1 + 0.15 * e.lce2 + 0.7 * e.lcon));
    CHECK(e.val_acc >= 0.0);
    CHECK(e.val_acc <= 1.0);
  }
}

TEST_CASE("auxiliary branch gets no gradient when its terms are off") {
  Fixture f;
  auto c = quick_config();
  c.augment_enabled = false;
  c.weights = {1.0, 0.0, 0.0};
  auto pair = init_model(c.model, 1);
  const auto tf = frames_of(f.train_view, 6);
  const auto af = frames_of(f.aux_view, 6);
  const auto tx = frames_to_tensor(tf, 1.0), ax = frames_to_tensor(af, 1.0);
  const std::vector<int> ty{0, 1, 2, 0, 1, 2}, ay{0, 1, 2, 0, 1, 2};
  zero(pair);
  dual_branch_step(pair.target, &pair.auxiliary, tx, ty, &ax, ay, c, true);
  CHECK(grad_norm(pair.auxiliary) == 0.0);
  CHECK(grad_norm(pair.target) > 0.0);
}

TEST_CASE("stop-gradient leaves only the auxiliary cross-entropy gradient") {
  Fixture f;
  auto c = quick_config();
  auto pair = init_model(c.model, 1);
  const auto tx = frames_to_tensor(frames_of(f.train_view, 6), 1.0);
  const auto ax = frames_to_tensor(frames_of(f.aux_view, 6), 1.0);
  const std::vector<int> y{0, 1, 2, 0, 1, 2};

  c.stop_gradient_auxiliary = true;
  zero(pair);
  const auto with_stop = dual_branch_step(pair.target, &pair.auxiliary, tx, y, &ax, y, c, true);
  std::vector<pressure_id::AlignedBuffer> stopped;
  for (auto* p : pair.auxiliary.parameters()) stopped.push_back(p->grad);

  auto c2 = c;
  c2.stop_gradient_auxiliary = false;
  c2.weights.contrastive = 0.0;
  zero(pair);
  dual_branch_step(pair.target, &pair.auxiliary, tx, y, &ax, y, c2, true);
  const auto params = pair.auxiliary.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i]->grad == stopped[i]);
  CHECK(with_stop.contrastive > 0.0);
}

TEST_CASE("combined objective gradient matches finite differences") {
  Fixture f;
  auto c = quick_config();
  c.augment_enabled = false;
  auto pair = init_model(c.model, 2);
  // Zero biases over zero pixels put every ReLU exactly on its kink.
  std::mt19937_64 jitter(5);
  std::normal_distribution<double> small(0.0, 0.05);
  for (auto* p : pair.target.parameters())
    if (p->name.ends_with("bias"))
      for (double& v : p->value) v = small(jitter);
  for (auto* p : pair.auxiliary.parameters())
    if (p->name.ends_with("bias"))
      for (double& v : p->value) v = small(jitter);
  const auto tx = frames_to_tensor(frames_of(f.train_view, 4), 1.0);
  const auto ax = frames_to_tensor(frames_of(f.aux_view, 4), 1.0);
  const std::vector<int> ty{0, 1, 0, 1}, ay{0, 1, 2, 1};
  zero(pair);
  dual_branch_step(pair.target, &pair.auxiliary, tx, ty, &ax, ay, c, true);
  const auto loss = [&] { return dual_branch_step(pair.target, &pair.auxiliary, tx, ty, &ax, ay, c, false).total; };

  std::vector<Parameter*> params = pair.target.parameters();
  for (auto* p : pair.auxiliary.parameters()) params.push_back(p);
  std::mt19937_64 rng(3);
  int good = 0, total = 0;
  for (auto* p : params) {
    std::uniform_int_distribution<std::size_t> pick(0, p->value.size() - 1);
    for (int k = 0; k < 4; ++k, ++total) {
      const auto i = pick(rng);
      const double fd = oracle::central_difference(loss, p->value[i], 1e-6);
      good += oracle::relative_error(p->grad[i], fd) < 1e-3 ? 1 : 0;
    }
  }
  CHECK(good >= total * 95 / 100);
}

TEST_CASE("single-branch training ignores the auxiliary terms") {
  Fixture f;
  auto c = quick_config();
  c.weights = {1.0, 0.0, 0.0};
  c.augment_enabled = false;
  const auto r = train(f.train_view, f.val_view, nullptr, c);
  for (const auto& e : r.history.epochs) {
    CHECK(e.lce2 == 0.0);
    CHECK(e.lcon == 0.0);
  }
}

TEST_CASE("non-finite losses abort training") {
  Fixture f;
  auto c = quick_config();
  c.model.input_scale = std::numeric_limits<double>::max();
  CHECK_THROWS_AS(train(f.train_view, f.val_view, &f.aux_view, c), TrainingError);
}

TEST_CASE("training preconditions") {
  Fixture f;
  auto c = quick_config();
  CHECK_THROWS_AS(train(f.train_view, DataView{}, &f.aux_view, c), ValidationError);
  c.epochs = 0;
  CHECK_THROWS_AS(train(f.train_view, f.val_view, &f.aux_view, c), ValidationError);
  c = quick_config();
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = quick_config();
  c.model.class_count = 4;
  CHECK_THROWS_AS(train(f.train_view, f.val_view, &f.aux_view, c), ValidationError);
  CHECK_THROWS_AS(accuracy(init_model(quick_config().model, 1).target, DataView{}), ValidationError);
}

TEST_CASE("argmax ties go to the lowest index") {
  RowMatrix l(2, 3);
  l << 1, 3, 3, 2, 2, 2;
  CHECK(argmax_rows(l) == std::vector<int>{1, 0});
}

TEST_CASE("adam minimises a quadratic and dedupes shared parameters") {
  Parameter p("x", 2);
  p.value = {3.0, -2.0};
  Adam opt({&p, &p}, 0.1);
  CHECK(opt.parameters().size() == 1);
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    p.grad = {2.0 * p.value[0], 2.0 * p.value[1]};
    opt.step();
  }
  CHECK(std::abs(p.value[0]) < 1e-2);
  CHECK(std::abs(p.value[1]) < 1e-2);
}

TEST_CASE("shared decoder training keeps the alias") {
  Fixture f;
  auto c = quick_config();
  c.epochs = 1;
  c.model.decoder_sharing = DecoderSharing::shared;
  const auto r = train(f.train_view, f.val_view, &f.aux_view, c);
  CHECK(r.models.decoder_shared());
}

TEST_CASE("history csv is written") {
  TrainHistory h;
  h.epochs.push_back({1, 0.5, 0.25, 1.0, 0.1, 0.75});
  CHECK(h.to_csv() == "epoch,lce1,lce2,lcon,total,val_acc\n1,0.5,0.25,1,0.10000000000000001,0.75\n");
}
