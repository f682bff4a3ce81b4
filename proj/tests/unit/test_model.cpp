#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pressure_id/checkpoint.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/model.hpp"
#include "temp_dir.hpp"

using namespace pressure_id;

namespace {

ModelConfig config_for(EncoderVariant v, int d = 16) {
  ModelConfig c;
  c.encoder = {v, d};
  return c;
}

}  // namespace

TEST_CASE("encoder depth ordering") {
  std::size_t previous = 0;
  for (auto v : {EncoderVariant::tiny, EncoderVariant::small, EncoderVariant::medium, EncoderVariant::large}) {
    const auto pair = init_model(config_for(v), 1);
    const auto n = pair.target.parameter_count();
    CHECK(n > previous);
    previous = n;
  }
}

TEST_CASE("embedding and logit shapes") {
  const auto ds = oracle::small_dataset(2, 1, 3, 1);
  std::vector<PressureFrame> frames;
  for (const auto& r : ds.records) frames.push_back(r.frame);
  for (auto v : {EncoderVariant::tiny, EncoderVariant::small}) {
    const auto pair = init_model(config_for(v, 12), 2);
    const auto z = pair.target.encode(frames);
    CHECK(z.rows() == 6);
    CHECK(z.cols() == 12);
    const auto logits = pair.target.decode(z);
    CHECK(logits.cols() == 8);
    CHECK_THROWS_AS(pair.target.decode(RowMatrix::Zero(2, 5)), ValidationError);
    CHECK_THROWS_AS(pair.target.encode(Tensor(1, 1, 28, 40)), ValidationError);
  }
}

TEST_CASE("initialisation is deterministic and branch encoders differ") {
  const auto a = init_model(config_for(EncoderVariant::tiny), 5);
  const auto b = init_model(config_for(EncoderVariant::tiny), 5);
  auto pa = const_cast<BranchModel&>(a.target).parameters();
  auto pb = const_cast<BranchModel&>(b.target).parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  auto aux = const_cast<BranchModel&>(a.auxiliary).parameters();
  CHECK(pa[0]->value != aux[0]->value);
}

TEST_CASE("shared decoders alias and survive cloning") {
  auto cfg = config_for(EncoderVariant::tiny);
  cfg.decoder_sharing = DecoderSharing::shared;
  const auto pair = init_model(cfg, 3);
  CHECK(pair.decoder_shared());
  const auto copy = pair.clone();
  CHECK(copy.decoder_shared());
  CHECK(copy.target.decoder_ptr() != pair.target.decoder_ptr());

  cfg.decoder_sharing = DecoderSharing::independent;
  const auto indep = init_model(cfg, 3);
  CHECK_FALSE(indep.decoder_shared());
  CHECK_FALSE(indep.clone().decoder_shared());
}

TEST_CASE("model config validation and names") {
  auto c = config_for(EncoderVariant::tiny, 4);
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config_for(EncoderVariant::tiny);
  c.class_count = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(encoder_variant_from_string("medium") == EncoderVariant::medium);
  CHECK(to_string(DecoderSharing::shared) == "shared");
  CHECK_THROWS_AS(encoder_variant_from_string("huge"), ValidationError);
}

TEST_CASE("contrast projection normalises rows") {
  RowMatrix z(3, 2);
  z << 3, 4, 0, 0, -1, 0;
  const auto p = project_for_contrast(z);
  CHECK(p.zero_rows == 1);
  CHECK(p.unit(0, 0) == doctest::Approx(0.6));
  CHECK(p.unit(1, 1) == 0.0);
  CHECK(p.unit.row(2).norm() == doctest::Approx(1.0));
}

TEST_CASE("contrast projection backward matches finite differences") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix z(4, 5), g(4, 5);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z.data()[i] = normal(rng);
    g.data()[i] = normal(rng);
  }
  const auto p = project_for_contrast(z);
  const RowMatrix dz = project_for_contrast_backward(p, g);
  const auto loss = [&] { return (project_for_contrast(z).unit.array() * g.array()).sum(); };
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double fd = oracle::central_difference(loss, z.data()[i], 1e-6);
    CHECK(oracle::relative_error(dz.data()[i], fd) < 1e-6);
  }
}

TEST_CASE("projection head changes only the contrastive view") {
  auto cfg = config_for(EncoderVariant::tiny);
  cfg.projection_head = true;
  const auto pair = init_model(cfg, 4);
  REQUIRE(pair.target.head() != nullptr);
  const RowMatrix z = RowMatrix::Ones(2, 16);
  CHECK(pair.target.project(z).cols() == 16);
  CHECK_FALSE(pair.target.project(z).isApprox(z));
  const auto plain = init_model(config_for(EncoderVariant::tiny), 4);
  CHECK(plain.target.project(z) == z);
}

TEST_CASE("checkpoint round trip preserves outputs") {
  testing_support::TempDir dir;
  const auto ds = oracle::small_dataset(2, 1, 2, 1);
  std::vector<PressureFrame> frames;
  for (const auto& r : ds.records) frames.push_back(r.frame);
  for (bool head : {false, true}) {
    auto cfg = config_for(EncoderVariant::small, 8);
    cfg.projection_head = head;
    cfg.input_scale = 0.5;
    const auto pair = init_model(cfg, 6);
    save_checkpoint(pair.target, dir / "m.bin");
    const auto back = load_checkpoint(dir / "m.bin");
    CHECK(back.config() == cfg);
    CHECK(back.encode(frames) == pair.target.encode(frames));
    CHECK(back.decode(back.encode(frames)) == pair.target.decode(pair.target.encode(frames)));
  }
}

TEST_CASE("checkpoint corruption is detected") {
  testing_support::TempDir dir;
  const auto pair = init_model(config_for(EncoderVariant::tiny), 6);
  save_checkpoint(pair.target, dir / "m.bin");
  auto bytes = testing_support::read_bytes(dir / "m.bin");
  bytes.resize(bytes.size() - 8);
  testing_support::write_bytes(dir / "m.bin", bytes);
  CHECK_THROWS_AS(load_checkpoint(dir / "m.bin"), CorruptionError);
  bytes[0] = 'Z';
  testing_support::write_bytes(dir / "m.bin", bytes);
  CHECK_THROWS_AS(load_checkpoint(dir / "m.bin"), FormatError);
  CHECK(model_config_from_json(model_config_to_json(pair.target.config())) == pair.target.config());
}
