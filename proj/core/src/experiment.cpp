#include "pressure_id/experiment.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "pressure_id/errors.hpp"

namespace pressure_id {
namespace {

std::string join_accuracies(std::span<const double> values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ";" : "") << values[i];
  return os.str();
}

std::string format(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<int> postures_of(const DataView& view) {
  std::vector<int> out;
  out.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) out.push_back(view[i].posture_id);
  return out;
}

void check_seeds(std::span<const std::uint64_t> seeds) { require(!seeds.empty(), "seed list is empty"); }

CurvePoint sweep_point(int value, const Dataset& target, const Dataset* auxiliary, const MPnSSpec& spec,
                       const TrainConfig& config, std::span<const std::uint64_t> seeds, Method method,
                       const MethodOptions& options, const ProgressFn& progress, const std::string& tag) {
  CurvePoint point;
  point.value = value;
  for (auto seed : seeds) {
    const auto outcome = run_method(method, target, auxiliary, spec, config, seed, options);
    point.accuracies.push_back(outcome.report.accuracy);
    if (progress) progress(tag + " seed=" + std::to_string(seed) + " acc=" + format(outcome.report.accuracy));
  }
  std::tie(point.mean, point.stddev) = mean_and_stddev(point.accuracies);
  return point;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::ours: return "ours";
    case Method::nil: return "nil";
    case Method::aug: return "aug";
    case Method::recon: return "recon";
    case Method::trans: return "trans";
    case Method::knn: return "knn";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::ours, Method::nil, Method::aug, Method::recon, Method::trans, Method::knn})
    if (to_string(m) == name) return m;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

RunOutcome run_method(Method method, const Dataset& target, const Dataset* auxiliary, MPnSSpec spec,
                      TrainConfig config, std::uint64_t seed, const MethodOptions& options) {
  spec.split_seed = seed;
  config.seed = seed;
  if (method == Method::ours || method == Method::trans)
    require(auxiliary != nullptr, std::string(to_string(method)) + " needs an auxiliary dataset");
  if (method == Method::knn) BaselineSpec{BaselineKind::knn, options.knn_k, options.pretrain_epochs}.validate();
  require(options.pretrain_epochs >= 0, "pretrain_epochs must be >= 0");

  RunOutcome out;
  out.split = split_mpns(target, spec);
  const DataView train_view = DataView::of(target, out.split.train);
  const DataView val_view = DataView::of(target, out.split.val);
  const DataView test_view = DataView::of(target, out.split.test);
  const std::string name(to_string(method));

  if (method == Method::knn) {
    const auto knn = run_knn(train_view, test_view, options.knn_k);
    const auto truth = test_view.labels();
    const auto postures = postures_of(test_view);
    const int classes = std::max(config.model.class_count, static_cast<int>(target.manifest.subject_count));
    out.report = make_report(name, out.split.spec, seed, classes, knn.predictions, truth, postures,
                             out.split.train_postures);
    return out;
  }

  switch (method) {
    case Method::ours: {
      const DataView aux_view = DataView::all(*auxiliary);
      auto trained = train(train_view, val_view, &aux_view, config);
      out.history = std::move(trained.history);
      out.model = trained.models.target.clone();
      out.models = std::move(trained.models);
      break;
    }
    case Method::nil:
    case Method::aug: {
      auto r = method == Method::nil ? run_nil(train_view, val_view, test_view, config)
                                     : run_aug(train_view, val_view, test_view, config);
      out.history = std::move(r.history);
      out.model = std::move(r.model);
      break;
    }
    case Method::recon: {
      auto r = run_recon(train_view, val_view, test_view, config, options.pretrain_epochs);
      out.history = std::move(r.baseline.history);
      out.model = std::move(r.baseline.model);
      out.pretrain_losses = std::move(r.pretraining.losses);
      break;
    }
    case Method::trans: {
      auto r = run_trans(train_view, val_view, test_view, DataView::all(*auxiliary), config, options.pretrain_epochs);
      out.history = std::move(r.baseline.history);
      out.model = std::move(r.baseline.model);
      out.pretrain_accuracy = r.pretrain_accuracy;
      break;
    }
    case Method::knn: break;
  }
  out.report = evaluate(*out.model, test_view, name, out.split, seed);
  out.report.best_epoch = out.history.best_epoch;
  return out;
}

std::string AblationCurve::to_csv() const {
  std::ostringstream os;
  os << parameter << ",runs,mean,std,accuracies\n";
  for (const auto& p : points)
    os << p.value << ',' << p.accuracies.size() << ',' << format(p.mean) << ',' << format(p.stddev) << ','
       << join_accuracies(p.accuracies) << '\n';
  return os.str();
}

AblationCurve ablate_postures(const Dataset& target, const Dataset* auxiliary, std::span<const int> m_values,
                              const MPnSSpec& spec, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                              Method method, const MethodOptions& options, const ProgressFn& progress) {
  require(!m_values.empty(), "ablate_postures: empty m list");
  check_seeds(seeds);
  for (int m : m_values)
    require(m >= 1 && m <= static_cast<int>(target.manifest.posture_count),
            "ablate_postures: m=" + std::to_string(m) + " outside [1, posture_count]");
  AblationCurve curve{"postures", {}};
  for (int m : m_values) {
    MPnSSpec s = spec;
    s.postures = m;
    curve.points.push_back(
        sweep_point(m, target, auxiliary, s, config, seeds, method, options, progress, "m=" + std::to_string(m)));
  }
  return curve;
}

AblationCurve ablate_samples(const Dataset& target, const Dataset* auxiliary, std::span<const int> n_values,
                             const MPnSSpec& spec, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                             Method method, const MethodOptions& options, const ProgressFn& progress) {
  require(!n_values.empty(), "ablate_samples: empty n list");
  check_seeds(seeds);
  for (int n : n_values)
    require(n >= 1 && n <= static_cast<int>(target.manifest.samples_per_subject_posture),
            "ablate_samples: n=" + std::to_string(n) + " outside [1, samples_per_subject_posture]");
  AblationCurve curve{"samples", {}};
  for (int n : n_values) {
    MPnSSpec s = spec;
    s.samples = n;
    curve.points.push_back(
        sweep_point(n, target, auxiliary, s, config, seeds, method, options, progress, "n=" + std::to_string(n)));
  }
  return curve;
}

std::vector<EncoderDecoderCell> ablate_encoder_decoder(const Dataset& target, const Dataset* auxiliary,
                                                       std::span<const EncoderVariant> variants,
                                                       std::span<const DecoderSharing> sharings,
                                                       const MPnSSpec& spec, const TrainConfig& config,
                                                       std::span<const std::uint64_t> seeds,
                                                       const ProgressFn& progress) {
  require(!variants.empty() && !sharings.empty(), "ablate_encoder_decoder: empty grid");
  check_seeds(seeds);
  std::vector<EncoderDecoderCell> cells;
  for (auto variant : variants) {
    for (auto sharing : sharings) {
      TrainConfig c = config;
      c.model.encoder.variant = variant;
      c.model.decoder_sharing = sharing;
      const std::string tag = std::string(to_string(variant)) + "/" + std::string(to_string(sharing));
      const auto point = sweep_point(0, target, auxiliary, spec, c, seeds, Method::ours, {}, progress, tag);
      cells.push_back({variant, sharing, point.accuracies, point.mean, point.stddev});
    }
  }
  return cells;
}

std::string encoder_decoder_csv(std::span<const EncoderDecoderCell> cells) {
  std::ostringstream os;
  os << "encoder,decoder,runs,mean,std,accuracies\n";
  for (const auto& c : cells)
    os << to_string(c.variant) << ',' << to_string(c.sharing) << ',' << c.accuracies.size() << ',' << format(c.mean)
       << ',' << format(c.stddev) << ',' << join_accuracies(c.accuracies) << '\n';
  return os.str();
}

}  // namespace pressure_id
