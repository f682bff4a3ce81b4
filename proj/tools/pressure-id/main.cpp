#include <exception>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "pressure_id/errors.hpp"

using namespace pressure_id;
using namespace pressure_id::cli;

namespace {

// Flags that override the experiment config. Unset flags leave it alone.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> name, method, seeds, target, auxiliary;
  std::optional<std::uint64_t> data_seed;
  std::optional<int> m, n, epochs, batch_size, embedding_dim, knn_k, pretrain_epochs;
  std::optional<double> lr, temperature, val_fraction;
  std::optional<std::string> encoder, decoder;
  bool no_augment = false;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--name", name, "run name (directory under runs/)");
    app.add_option("--method", method, "ours, nil, aug, recon, trans or knn");
    app.add_option("--seeds", seeds, "comma-separated seeds");
    app.add_option("--target", target, "chr-syn, bed-syn or a .prsd file");
    app.add_option("--auxiliary", auxiliary, "chr-syn, bed-syn or a .prsd file");
    app.add_option("--data-seed", data_seed, "generator seed for preset datasets");
    app.add_option("--epochs", epochs);
    app.add_option("--batch-size", batch_size);
    app.add_option("--lr", lr, "learning rate");
    app.add_option("--temperature", temperature);
    app.add_option("--val-fraction", val_fraction);
    app.add_option("--encoder", encoder, "tiny, small, medium or large");
    app.add_option("--embedding-dim", embedding_dim);
    app.add_option("--decoder", decoder, "independent or shared");
    app.add_option("--knn-k", knn_k);
    app.add_option("--pretrain-epochs", pretrain_epochs, "recon/trans pretraining epochs");
    app.add_flag("--no-augment", no_augment, "train on unaugmented batches");
  }

  void attach_split(CLI::App& app) {
    app.add_option("--m", m, "training postures per subject");
    app.add_option("--n", n, "samples per training posture");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config ? load_config(*config) : ExperimentConfig{};
    if (name) c.name = *name;
    if (method) c.method = method_from_string(*method);
    if (seeds) c.seeds = parse_seed_list(*seeds);
    if (target) c.target = DatasetSource::parse(*target, c.target.seed);
    if (auxiliary) c.auxiliary = DatasetSource::parse(*auxiliary, c.auxiliary.seed);
    if (data_seed) c.target.seed = c.auxiliary.seed = *data_seed;
    if (m) c.split.postures = *m;
    if (n) c.split.samples = *n;
    if (val_fraction) c.split.val_fraction = *val_fraction;
    if (epochs) c.train.epochs = *epochs;
    if (batch_size) c.train.batch_size = *batch_size;
    if (lr) c.train.learning_rate = *lr;
    if (temperature) c.train.temperature = *temperature;
    if (encoder) c.train.model.encoder.variant = encoder_variant_from_string(*encoder);
    if (embedding_dim) c.train.model.encoder.embedding_dim = *embedding_dim;
    if (decoder) c.train.model.decoder_sharing = decoder_sharing_from_string(*decoder);
    if (knn_k) c.options.knn_k = *knn_k;
    if (pretrain_epochs) c.options.pretrain_epochs = *pretrain_epochs;
    if (no_augment) c.train.augment_enabled = false;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"User identification on pressure textiles"};
  app.require_subcommand(1);
  std::string out_root = default_output_root().string();
  app.add_option("-o,--out", out_root, "output root (default $PRESSURE_ID_OUT or ./out)");

  GenerateOptions gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("--preset", gen.preset, "chr-syn or bed-syn")->check(CLI::IsMember({"chr-syn", "bed-syn"}));
  generate->add_option("--seed", gen.seed);
  generate->add_option("--samples", gen.samples, "samples per subject and posture");
  generate->add_option("--out", gen_out, "directory (default <out>/data)");

  Overrides split_flags;
  std::uint64_t split_seed = 0;
  std::string split_out;
  auto* split = app.add_subcommand("split", "write an mPnS split of the target dataset");
  split_flags.attach(*split);
  split_flags.attach_split(*split);
  split->add_option("--seed", split_seed, "split seed");
  split->add_option("--out", split_out, "split file")->required();

  Overrides train_flags;
  TrainOptions train_opts;
  bool no_aggregate = false;
  auto* train = app.add_subcommand("train", "train and evaluate one method over several seeds");
  train_flags.attach(*train);
  train_flags.attach_split(*train);
  train->add_option("--out", out_root, "output root");
  train->add_option("-j,--jobs", train_opts.jobs, "seeds trained in parallel subprocesses")->check(CLI::PositiveNumber);
  train->add_flag("--no-aggregate", no_aggregate)->group("");

  Overrides ablate_flags;
  std::string kind, m_text, n_text, encoders_text, decoders_text;
  auto* ablate = app.add_subcommand("ablate", "sweep training postures, samples or encoder/decoder design");
  ablate->add_option("kind", kind, "postures, samples or encdec")
      ->required()
      ->check(CLI::IsMember({"postures", "samples", "encdec"}));
  ablate_flags.attach(*ablate);
  ablate->add_option("--m", m_text, "postures swept (list) or held fixed (single value)");
  ablate->add_option("--n", n_text, "samples swept (list) or held fixed (single value)");
  ablate->add_option("--encoders", encoders_text, "encdec: comma-separated encoder variants");
  ablate->add_option("--decoders", decoders_text, "encdec: comma-separated decoder modes");
  ablate->add_option("--out", out_root, "output root");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate finished runs into a markdown table");
  report->add_option("runs", report_dirs, "run directories (runs/<name>)")->required();
  report->add_option("--out", report_out, "write the table to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      gen.out_dir = gen_out.empty() ? std::filesystem::path(out_root) / "data" : std::filesystem::path(gen_out);
      cmd_generate(gen);
    } else if (*split) {
      cmd_split(split_flags.resolve(), split_seed, split_out);
    } else if (*train) {
      train_opts.out_root = out_root;
      train_opts.aggregate = !no_aggregate;
      cmd_train(train_flags.resolve(), train_opts);
    } else if (*ablate) {
      AblateOptions opts;
      opts.out_root = out_root;
      auto config = ablate_flags.resolve();
      const auto fixed_value = [](const std::string& text) {
        const auto v = parse_int_list(text);
        if (v.size() != 1) throw ValidationError("expected a single value, got '" + text + "'");
        return v.front();
      };
      if (kind == "postures") {
        opts.values = m_text.empty() ? std::vector<int>{1, 2, 4, 6, 8} : parse_int_list(m_text);
        if (!n_text.empty()) config.split.samples = fixed_value(n_text);
      } else if (kind == "samples") {
        opts.values = n_text.empty() ? std::vector<int>{10, 25, 50, 100} : parse_int_list(n_text);
        if (!m_text.empty()) config.split.postures = fixed_value(m_text);
      } else {
        if (!m_text.empty()) config.split.postures = fixed_value(m_text);
        if (!n_text.empty()) config.split.samples = fixed_value(n_text);
      }
      if (!encoders_text.empty()) {
        opts.encoders.clear();
        for (const auto& e : CLI::detail::split(encoders_text, ',')) opts.encoders.push_back(encoder_variant_from_string(e));
      }
      if (!decoders_text.empty()) {
        opts.decoders.clear();
        for (const auto& d : CLI::detail::split(decoders_text, ',')) opts.decoders.push_back(decoder_sharing_from_string(d));
      }
      cmd_ablate(kind, config, opts);
    } else if (*report) {
      std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
      cmd_report(dirs, report_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(report_out));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
