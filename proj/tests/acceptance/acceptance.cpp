// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// non-zero when any selected criterion fails. Pass criterion numbers as
// arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pressure_id/augment.hpp"
#include "pressure_id/baselines.hpp"
#include "pressure_id/dataset.hpp"
#include "pressure_id/evaluation.hpp"
#include "pressure_id/experiment.hpp"
#include "pressure_id/losses.hpp"
#include "pressure_id/split.hpp"
#include "pressure_id/synthetic.hpp"
#include "pressure_id/trainer.hpp"
#include "temp_dir.hpp"

using namespace pressure_id;

namespace {

constexpr std::uint64_t kDataSeed = 42;
constexpr int kEndToEndEpochs = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const Dataset& chr_syn() {
  static const Dataset ds = generate_synthetic(synthetic_preset("chr-syn", kDataSeed));
  return ds;
}

const Dataset& bed_syn() {
  static const Dataset ds = generate_synthetic(synthetic_preset("bed-syn", kDataSeed));
  return ds;
}

TrainConfig end_to_end_config() {
  TrainConfig c;
  c.epochs = kEndToEndEpochs;
  c.model.encoder = {EncoderVariant::tiny, 128};
  return c;
}

// (method, m, seed) -> test accuracy; shared between criteria 6 and 7.
double end_to_end_accuracy(Method method, int m, std::uint64_t seed) {
  static std::map<std::tuple<int, int, std::uint64_t>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(method), m, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  MPnSSpec spec;
  spec.postures = m;
  spec.samples = 50;
  const auto out = run_method(method, chr_syn(), &bed_syn(), spec, end_to_end_config(), seed);
  std::printf("    %s m=%d seed=%llu acc=%.4f best_epoch=%d\n", std::string(to_string(method)).c_str(), m,
              static_cast<unsigned long long>(seed), out.report.accuracy, out.report.best_epoch);
  std::fflush(stdout);
  return cache[key] = out.report.accuracy;
}

Outcome supcon_oracle() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> rows(4, 16), dims(2, 8), classes(1, 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double taus[] = {0.05, 0.1, 0.5, 1.0};
  double worst = 0.0;
  for (int b = 0; b < 200; ++b) {
    const int n = rows(rng), d = dims(rng), k = classes(rng);
    std::uniform_int_distribution<int> label(0, k - 1);
    RowMatrix z(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    bool has_pair = false;
    while (!has_pair) {
      for (auto& v : y) v = label(rng);
      std::set<int> seen;
      for (int v : y) has_pair = has_pair || !seen.insert(v).second;
    }
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
    z.rowwise().normalize();
    const double tau = taus[b % 4];
    worst = std::max(worst, std::abs(supcon_loss({z, y, tau}) - oracle::supcon(z, y, tau)));
  }
  return {worst <= 1e-6, "max abs diff " + fmt("%.3g", worst)};
}

Outcome analytic_values() {
  const double ce = cross_entropy(RowMatrix::Zero(4, 8), std::vector<int>{0, 3, 5, 7});
  RowMatrix same = RowMatrix::Zero(4, 3);
  same.col(1).setOnes();
  const double con = supcon_loss({same, {1, 1, 1, 1}, 0.1});
  const double total = total_loss(2.0, 2.0, 1.0, {0.15, 0.15, 0.7});
  const bool ok = std::abs(ce - std::log(8.0)) <= 1e-9 && std::abs(con - std::log(3.0)) <= 1e-6 && total == 1.3;
  return {ok, "ce-ln8=" + fmt("%.3g", ce - std::log(8.0)) + " con-ln3=" + fmt("%.3g", con - std::log(3.0)) +
                  " total=" + fmt("%.17g", total)};
}

Outcome gradient_check() {
  TrainConfig c;
  c.augment_enabled = false;
  c.model.encoder = {EncoderVariant::tiny, 8};
  auto pair = init_model(c.model, 7);
  const auto& chr = chr_syn();
  const auto& bed = bed_syn();
  std::vector<PressureFrame> tf, af;
  const std::vector<int> ty{0, 1, 0, 1}, ay{0, 1, 2, 1};
  for (int i = 0; i < 4; ++i) {
    tf.push_back(chr.records[static_cast<std::size_t>(ty[static_cast<std::size_t>(i)] * 1200 + i)].frame);
    af.push_back(bed.records[static_cast<std::size_t>(ay[static_cast<std::size_t>(i)] * 600 + i)].frame);
  }
  const Tensor tx = frames_to_tensor(tf, 1.0), ax = frames_to_tensor(af, 1.0);

  std::vector<Parameter*> params = pair.target.parameters();
  for (auto* p : pair.auxiliary.parameters()) params.push_back(p);
  for (auto* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  dual_branch_step(pair.target, &pair.auxiliary, tx, ty, &ax, ay, c, true);
  const auto loss = [&] { return dual_branch_step(pair.target, &pair.auxiliary, tx, ty, &ax, ay, c, false).total; };

  std::vector<std::pair<Parameter*, std::size_t>> all;
  for (auto* p : params)
    for (std::size_t i = 0; i < p->value.size(); ++i) all.emplace_back(p, i);
  std::mt19937_64 rng(11);
  std::shuffle(all.begin(), all.end(), rng);
  int good = 0;
  for (int s = 0; s < 200; ++s) {
    auto [p, i] = all[static_cast<std::size_t>(s)];
    const double fd = oracle::central_difference(loss, p->value[i], 1e-4);
    good += oracle::relative_error(p->grad[i], fd) < 1e-3 ? 1 : 0;
  }
  return {good >= 190, std::to_string(good) + "/200 within 1e-3"};
}

Outcome augmentation() {
  std::mt19937_64 rng(12);
  bool involution = true, identity = true, conserved = true, nonneg = true;
  const auto off = AugmentConfig::disabled();
  AugmentConfig on;
  on.p_flip = on.p_rotate = on.p_translate = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = oracle::random_frame(rng);
    if (i < 200) {
      involution = involution && flip_horizontal(flip_horizontal(f)) == f;
      identity = identity && augment_frame(f, off, rng) == f;
    }
    nonneg = nonneg && augment_frame(f, on, rng).is_nonnegative() && augment_frame(f, AugmentConfig{}, rng).is_nonnegative();
  }
  std::uniform_int_distribution<int> shift(-4, 4);
  std::uniform_real_distribution<float> value(0.0f, 5.0f);
  for (int i = 0; i < 200; ++i) {
    PressureFrame f;
    for (int r = 4; r < kFrameRows - 4; ++r)
      for (int c = 4; c < kFrameCols - 4; ++c) f.at(r, c) = value(rng);
    conserved = conserved && translate(f, shift(rng), shift(rng)).total() == f.total();
  }
  return {involution && identity && conserved && nonneg,
          std::string("involution=") + (involution ? "ok" : "bad") + " identity=" + (identity ? "ok" : "bad") +
              " conservation=" + (conserved ? "ok" : "bad") + " non-negative=" + (nonneg ? "ok" : "bad")};
}

Outcome data_layer() {
  testing_support::TempDir dir;
  const auto& chr = chr_syn();
  save_dataset(chr, dir / "a.prsd");
  const auto back = load_dataset(dir / "a.prsd");
  bool round_trip = back.manifest == chr.manifest && back.records.size() == chr.records.size();
  for (std::size_t i = 0; round_trip && i < chr.records.size(); ++i)
    round_trip = back.records[i].frame == chr.records[i].frame && back.records[i].subject_id == chr.records[i].subject_id &&
                 back.records[i].posture_id == chr.records[i].posture_id && back.records[i].device == chr.records[i].device;

  save_dataset(generate_synthetic(synthetic_preset("chr-syn", kDataSeed)), dir / "b.prsd");
  const bool identical = testing_support::read_bytes(dir / "a.prsd") == testing_support::read_bytes(dir / "b.prsd") &&
                         testing_support::read_bytes(dir / "a.json") == testing_support::read_bytes(dir / "b.json");

  const auto split = split_mpns(chr, {2, 50, 1, 0.2});
  std::set<int> tested;
  for (auto i : split.test) tested.insert(chr.records[i].posture_id);
  const bool sizes = split.train.size() == 800 && tested.size() == 12;
  return {round_trip && identical && sizes, std::string("round-trip=") + (round_trip ? "ok" : "bad") +
                                                " byte-identical=" + (identical ? "ok" : "bad") +
                                                " |train|=" + std::to_string(split.train.size()) +
                                                " test postures=" + std::to_string(tested.size())};
}

Outcome end_to_end() {
  std::vector<double> ours, nil, aug;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ours.push_back(end_to_end_accuracy(Method::ours, 2, seed));
    nil.push_back(end_to_end_accuracy(Method::nil, 2, seed));
    aug.push_back(end_to_end_accuracy(Method::aug, 2, seed));
  }
  const double mo = mean_and_stddev(ours).first, mn = mean_and_stddev(nil).first, ma = mean_and_stddev(aug).first;
  return {mo >= mn + 0.02 && ma >= mn, "ours=" + fmt("%.4f", mo) + " nil=" + fmt("%.4f", mn) + " aug=" + fmt("%.4f", ma) +
                                           " epochs=" + std::to_string(kEndToEndEpochs)};
}

Outcome posture_trend() {
  std::vector<double> m2, m6;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    m2.push_back(end_to_end_accuracy(Method::ours, 2, seed));
    m6.push_back(end_to_end_accuracy(Method::ours, 6, seed));
  }
  const double a = mean_and_stddev(m2).first, b = mean_and_stddev(m6).first;
  return {b >= a, "m=2 " + fmt("%.4f", a) + " m=6 " + fmt("%.4f", b)};
}

Outcome knn_oracle() {
  const auto& chr = chr_syn();
  const auto split = split_mpns(chr, {2, 50, 3, 0.2});
  const auto train = DataView::of(chr, split.train);
  const auto test = DataView::of(chr, split.test);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> pick(0, test.size() - 1);
  int agree = 0;
  for (int q = 0; q < 100; ++q) {
    const auto& f = test[pick(rng)].frame;
    agree += knn_classify(train, f.values(), 5) == oracle::knn(train, f.values(), 5) ? 1 : 0;
  }
  return {agree == 100, std::to_string(agree) + "/100 queries agree"};
}

Outcome determinism() {
  testing_support::TempDir dir;
  TrainConfig c;
  c.epochs = 2;
  c.model.encoder = {EncoderVariant::tiny, 32};
  const auto target = oracle::small_dataset(8, 4, 30, 5);
  const auto aux = oracle::small_dataset(8, 3, 30, 5, Layout::bed);
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto out = run_method(Method::ours, target, &aux, {2, 20, 0, 0.2}, c, 9);
    write_history_csv(out.history, dir / name);
  }
  const auto a = testing_support::read_bytes(dir / "a.csv");
  return {!a.empty() && a == testing_support::read_bytes(dir / "b.csv"), std::to_string(a.size()) + " bytes compared"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "supcon matches oracle on 200 random batches", 10, supcon_oracle},
      {2, "analytic loss values", 0, analytic_values},
      {3, "dual-branch gradient check", 60, gradient_check},
      {4, "augmentation properties", 10, augmentation},
      {5, "data layer round trip, determinism and 2P50S split", 30, data_layer},
      {6, "end-to-end 2P50S: ours >= nil + 2pt, aug >= nil", 45 * 60, end_to_end},
      {7, "posture trend m=6 >= m=2", 0, posture_trend},
      {8, "knn matches linear-scan oracle", 0, knn_oracle},
      {9, "identical runs give identical history.csv", 0, determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.1fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
