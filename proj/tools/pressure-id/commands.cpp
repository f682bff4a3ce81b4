#include "commands.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "pressure_id/checkpoint.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/evaluation.hpp"
#include "pressure_id/image.hpp"
#include "pressure_id/synthetic.hpp"

extern char** environ;

namespace pressure_id::cli {
namespace fs = std::filesystem;

namespace {

void log(const std::string& line) { std::cerr << line << '\n'; }

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

fs::path run_dir_for(const ExperimentConfig& config, const fs::path& root) { return root / "runs" / config.name; }

void write_seed_artifacts(const RunOutcome& outcome, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "report.json", report_to_json(outcome.report));
  save_split(outcome.split, dir / "split.json");
  write_png(render_confusion(outcome.report.confusion), dir / "confusion.png");
  if (outcome.model) {
    write_history_csv(outcome.history, dir / "history.csv");
    save_checkpoint(*outcome.model, dir / "checkpoint.bin");
  }
  if (outcome.models) save_checkpoint(outcome.models->auxiliary, dir / "auxiliary.bin");
  if (!outcome.pretrain_losses.empty()) {
    std::ostringstream os;
    os << "epoch,loss\n" << std::setprecision(17);
    for (std::size_t i = 0; i < outcome.pretrain_losses.size(); ++i) os << i + 1 << ',' << outcome.pretrain_losses[i] << '\n';
    write_text(dir / "pretrain.csv", os.str());
  }
}

std::vector<RunReport> collect_reports(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw IoError("not a run directory: " + run_dir.string());
  std::vector<RunReport> reports;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const auto file = entry.path() / "report.json";
    if (entry.is_directory() && fs::exists(file)) reports.push_back(report_from_json(read_text(file)));
  }
  if (reports.empty()) throw IoError("no report.json under " + run_dir.string());
  std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  return reports;
}

AggregateReport write_aggregate(const fs::path& run_dir) {
  const auto reports = collect_reports(run_dir);
  const auto agg = aggregate(reports);
  write_text(run_dir / "aggregate.json", aggregate_to_json(agg));
  const std::vector<AggregateReport> rows{agg};
  write_text(run_dir / "summary.md", summary_table_markdown(rows));
  return agg;
}

// Re-invokes this executable once per seed with the resolved config.
void run_seeds_in_subprocesses(const fs::path& config_path, const std::vector<std::uint64_t>& seeds,
                               const fs::path& out_root, int jobs) {
  const std::string exe = fs::read_symlink("/proc/self/exe").string();
  std::map<pid_t, std::uint64_t> running;
  std::vector<std::uint64_t> failed;
  auto reap_one = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid < 0) throw IoError("wait failed");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) failed.push_back(running.at(pid));
    running.erase(pid);
  };
  for (const auto seed : seeds) {
    while (static_cast<int>(running.size()) >= jobs) reap_one();
    std::vector<std::string> args{exe,       "train",   "--config", config_path.string(), "--seeds",
                                  std::to_string(seed), "--out", out_root.string(), "--no-aggregate"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (::posix_spawn(&pid, exe.c_str(), nullptr, nullptr, argv.data(), environ) != 0)
      throw IoError("could not start worker for seed " + std::to_string(seed));
    running[pid] = seed;
  }
  while (!running.empty()) reap_one();
  if (!failed.empty()) {
    std::ostringstream os;
    os << "seed run(s) failed:";
    for (auto s : failed) os << ' ' << s;
    throw TrainingError(os.str());
  }
}

void write_curve(const AblationCurve& curve, const fs::path& dir) {
  write_text(dir / (curve.parameter + ".csv"), curve.to_csv());
  PlotSeries series;
  for (const auto& p : curve.points) {
    series.x.push_back(p.value);
    series.y.push_back(p.mean);
    series.error.push_back(p.stddev);
  }
  const std::vector<PlotSeries> all{series};
  write_png(render_curves(all), dir / (curve.parameter + ".png"));
  for (const auto& p : curve.points)
    std::cout << curve.parameter << '=' << p.value << "  " << fixed(p.mean) << " ± " << fixed(p.stddev) << '\n';
}

std::string encdec_markdown(const std::vector<EncoderDecoderCell>& cells) {
  std::ostringstream os;
  os << "| Encoder | Decoder | avg |\n|---|---|---|\n";
  for (const auto& c : cells)
    os << "| " << to_string(c.variant) << " | " << to_string(c.sharing) << " | " << fixed(c.mean) << "±"
       << fixed(c.stddev) << " |\n";
  return os.str();
}

}  // namespace

void cmd_generate(const GenerateOptions& options) {
  auto config = synthetic_preset(options.preset, options.seed);
  if (options.samples) config.samples_per_subject_posture = *options.samples;
  const auto dataset = generate_synthetic(config);
  fs::create_directories(options.out_dir);
  const auto path = options.out_dir / (options.preset + ".prsd");
  save_dataset(dataset, path);
  std::cout << path.string() << ": " << dataset.records.size() << " records (" << dataset.manifest.subject_count
            << " subjects x " << dataset.manifest.posture_count << " postures x "
            << dataset.manifest.samples_per_subject_posture << ")\n";
}

void cmd_split(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out) {
  const auto target = config.target.load();
  auto spec = config.split;
  spec.split_seed = seed;
  const auto split = split_mpns(target, spec);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_split(split, out);
  std::cout << out.string() << ": " << spec.label() << " train " << split.train.size() << ", val " << split.val.size()
            << ", test " << split.test.size() << '\n';
}

void cmd_train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  const auto run_dir = run_dir_for(config, options.out_root);
  fs::create_directories(run_dir);

  if (options.aggregate && options.jobs > 1 && config.seeds.size() > 1) {
    const auto config_path = run_dir / "config.json";
    write_text(config_path, config_to_json(config));
    run_seeds_in_subprocesses(config_path, config.seeds, options.out_root, options.jobs);
  } else {
    if (options.aggregate) write_text(run_dir / "config.json", config_to_json(config));
    const auto target = config.target.load();
    std::optional<Dataset> auxiliary;
    if (config.needs_auxiliary()) auxiliary = config.auxiliary.load();
    for (const auto seed : config.seeds) {
      const std::string tag = "[" + config.name + " " + std::string(to_string(config.method)) + " seed " +
                              std::to_string(seed) + "] ";
      log(tag + "training on " + config.target.describe() + ", " + config.split.label());
      const auto outcome = run_method(config.method, target, auxiliary ? &*auxiliary : nullptr, config.split,
                                      config.train, seed, config.options);
      write_seed_artifacts(outcome, run_dir / std::to_string(seed));
      std::string line = tag + "accuracy " + fixed(outcome.report.accuracy);
      if (outcome.model) line += " (best epoch " + std::to_string(outcome.report.best_epoch) + ")";
      log(line);
    }
  }

  if (!options.aggregate) return;
  const auto agg = write_aggregate(run_dir);
  const std::vector<AggregateReport> rows{agg};
  std::cout << summary_table_markdown(rows);
}

void cmd_ablate(const std::string& kind, const ExperimentConfig& config, const AblateOptions& options) {
  config.validate();
  const auto dir = options.out_root / "ablations" / config.name;
  fs::create_directories(dir);
  write_text(dir / (kind + ".config.json"), config_to_json(config));
  const auto target = config.target.load();
  std::optional<Dataset> auxiliary;
  if (config.needs_auxiliary() || kind == "encdec") auxiliary = config.auxiliary.load();
  const Dataset* aux = auxiliary ? &*auxiliary : nullptr;
  const ProgressFn progress = [](std::string_view msg) { log(std::string(msg)); };

  if (kind == "postures") {
    write_curve(ablate_postures(target, aux, options.values, config.split, config.train, config.seeds, config.method,
                                config.options, progress),
                dir);
  } else if (kind == "samples") {
    write_curve(ablate_samples(target, aux, options.values, config.split, config.train, config.seeds, config.method,
                               config.options, progress),
                dir);
  } else if (kind == "encdec") {
    const auto cells = ablate_encoder_decoder(target, aux, options.encoders, options.decoders, config.split,
                                              config.train, config.seeds, progress);
    write_text(dir / "encdec.csv", encoder_decoder_csv(cells));
    const auto table = encdec_markdown(cells);
    write_text(dir / "encdec.md", table);
    std::cout << table;
  } else {
    throw ValidationError("unknown ablation '" + kind + "' (expected postures, samples or encdec)");
  }
}

void cmd_report(const std::vector<fs::path>& run_dirs, const std::optional<fs::path>& out) {
  std::vector<AggregateReport> rows;
  for (const auto& dir : run_dirs) rows.push_back(write_aggregate(dir));
  const auto table = summary_table_markdown(rows);
  if (out) write_text(*out, table);
  std::cout << table;
}

}  // namespace pressure_id::cli
