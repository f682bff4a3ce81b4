#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pressure_id/augment.hpp"
#include "pressure_id/baselines.hpp"
#include "pressure_id/losses.hpp"
#include "pressure_id/model.hpp"
#include "pressure_id/rng.hpp"
#include "pressure_id/synthetic.hpp"
#include "pressure_id/trainer.hpp"

using namespace pressure_id;

namespace {

const Dataset& chair() {
  static const Dataset ds = [] {
    auto c = synthetic_preset("chr-syn", 42);
    c.samples_per_subject_posture = 20;
    return generate_synthetic(c);
  }();
  return ds;
}

std::vector<PressureFrame> first_frames(std::size_t n) {
  std::vector<PressureFrame> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(chair().records[i * 7 % chair().records.size()].frame);
  return out;
}

}  // namespace

static void BM_Encode(benchmark::State& state) {
  ModelConfig config;
  config.encoder = {static_cast<EncoderVariant>(state.range(0)), 128};
  const auto pair = init_model(config, 1);
  const auto frames = first_frames(32);
  for (auto _ : state) benchmark::DoNotOptimize(pair.target.encode(frames));
  state.SetItemsProcessed(state.iterations() * 32);
  state.SetLabel(std::string(to_string(config.encoder.variant)));
}
BENCHMARK(BM_Encode)
    ->Arg(static_cast<int>(EncoderVariant::tiny))
    ->Arg(static_cast<int>(EncoderVariant::small))
    ->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state) {
  TrainConfig config;
  config.model.encoder = {EncoderVariant::tiny, 128};
  auto pair = init_model(config.model, 1);
  const auto frames = first_frames(64);
  std::vector<int> labels(64);
  for (int i = 0; i < 64; ++i) labels[static_cast<std::size_t>(i)] = i % 8;
  const auto tx = frames_to_tensor(std::span(frames).first(32), 1.0);
  const auto ax = frames_to_tensor(std::span(frames).last(32), 1.0);
  const std::span<const int> y(labels.data(), 32);
  for (auto _ : state)
    benchmark::DoNotOptimize(dual_branch_step(pair.target, &pair.auxiliary, tx, y, &ax, y, config, true).total);
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

static void BM_Supcon(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  RowMatrix z(n, 128);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  z.rowwise().normalize();
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 8);
  const ContrastiveBatch batch{z, labels, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(supcon_loss_with_grad(batch).value);
}
BENCHMARK(BM_Supcon)->RangeMultiplier(2)->Range(32, 256);

static void BM_Augment(benchmark::State& state) {
  const auto frames = first_frames(64);
  const AugmentConfig config;
  auto rng = make_rng(5, 0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(augment_frame(frames[i++ % frames.size()], config, rng));
}
BENCHMARK(BM_Augment);

static void BM_KnnQuery(benchmark::State& state) {
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < chair().records.size(); i += 2) train.push_back(i);
  const auto view = DataView::of(chair(), train);
  const auto& query = chair().records[1].frame;
  for (auto _ : state) benchmark::DoNotOptimize(knn_classify(view, query.values(), 5));
  state.SetLabel(std::to_string(view.size()) + " references");
}
BENCHMARK(BM_KnnQuery)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
