#include "grasswalk/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grasswalk/analysis.hpp"
#include "grasswalk/bench.hpp"
#include "grasswalk/errors.hpp"
#include "grasswalk/parallel.hpp"
#include "grasswalk/trace_io.hpp"
#include "grasswalk/walk.hpp"

namespace grasswalk::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string> kCommands{"run", "study", "gap", "verify", "predict"};

// TOML reader whose [sections] only group keys for readability: every key is
// routed to the subcommand being run.
class SectionedConfig : public CLI::ConfigTOML {
 public:
  void set_target(std::string target) { target_ = std::move(target); }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> items = CLI::ConfigTOML::from_config(input);
    std::vector<CLI::ConfigItem> routed;
    for (CLI::ConfigItem& item : items) {
      if (item.name == "++" || item.name == "--") continue;
      item.parents.clear();
      if (!target_.empty()) item.parents.push_back(target_);
      routed.push_back(std::move(item));
    }
    return routed;
  }

 private:
  std::string target_;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  bool emit_iterates = false;
};

struct ProblemOpts {
  ProblemSpec spec;
  std::vector<double> spike_center;
  double spike_radius = 1e-3;
  double spike_depth = 0.0;
  std::optional<double> clip_level;
};

struct WalkOpts {
  WalkConfig cfg;
  std::string mode = "invariant";
  std::string start = "zero";
};

void add_common(CLI::App* app, Common& c, const std::string& default_out) {
  c.threads = default_thread_count();
  c.out = default_out;
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker cap (default: GRASSWALK_THREADS or 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--out", c.out, "Output path")->capture_default_str();
  app->add_flag("--emit-iterates", c.emit_iterates, "Include iterates in traces");
}

void add_problem(CLI::App* app, ProblemOpts& p) {
  app->add_option("--problem", p.spec.kind, "quadratic | rastrigin | ackley | thomson")
      ->check(CLI::IsMember({"quadratic", "rastrigin", "ackley", "thomson"}))
      ->capture_default_str();
  app->add_option("--dim", p.spec.dim, "Ambient dimension (not thomson)")->capture_default_str();
  app->add_option("--center", p.spec.center, "Center/shift value for every coordinate")
      ->capture_default_str();
  app->add_option("--N", p.spec.num_points, "Thomson: number of points")->capture_default_str();
  app->add_option("--n", p.spec.sphere_dim, "Thomson: sphere dimension")->capture_default_str();
  app->add_option("--spike-depth", p.spike_depth, "Subtract a spike of this depth (0: none)")
      ->capture_default_str();
  app->add_option("--spike-radius", p.spike_radius, "Spike radius")->capture_default_str();
  app->add_option("--spike-center", p.spike_center,
                  "Spike center (one value is broadcast to every coordinate)");
  app->add_option("--clip", p.clip_level, "Optimize max(loss, value) instead of loss");
}

void add_solver(CLI::App* app, SolverSpec& s) {
  app->add_option("--solver", s.kind, "shrink | exact | nelder-mead")
      ->check(CLI::IsMember({"shrink", "exact", "nelder-mead"}))
      ->capture_default_str();
  app->add_option("--m", s.shrink.num_scales, "Shrink descent: number of scales")
      ->capture_default_str();
  app->add_option("--r", s.shrink.proposals_per_scale, "Shrink descent: proposals per scale")
      ->capture_default_str();
  app->add_option("--s0", s.shrink.initial_scale, "Shrink descent: initial scale")
      ->capture_default_str();
  app->add_option("--nm-step", s.nelder_mead.initial_step, "Nelder-Mead: initial simplex step")
      ->capture_default_str();
  app->add_option("--nm-max-evals", s.nelder_mead.max_evals, "Nelder-Mead: evaluation cap")
      ->capture_default_str();
}

void add_walk(CLI::App* app, WalkOpts& w) {
  app->add_option("--k", w.cfg.k, "Plane dimension")->capture_default_str();
  app->add_option("--T", w.cfg.T, "Planes per round")->capture_default_str();
  app->add_option("--epsilon", w.cfg.epsilon_a, "Accuracy parameter epsilon_a")
      ->capture_default_str();
  app->add_option("--max-rounds", w.cfg.max_rounds, "Round budget")->capture_default_str();
  app->add_option("--mode", w.mode, "Conditioned sampling: invariant | span-gaussian")
      ->check(CLI::IsMember({"invariant", "span-gaussian"}))
      ->capture_default_str();
  app->add_option("--start", w.start, "Start point: zero | gaussian")
      ->check(CLI::IsMember({"zero", "gaussian"}))
      ->capture_default_str();
  app->add_flag("--anchored-start", w.cfg.anchored_start,
                "Round 1 samples planes through the start point");
  app->add_flag("--budget-only", w.cfg.budget_only, "Ignore epsilon; run exactly --max-rounds");
}

LossPtr make_loss(const ProblemOpts& p) {
  LossPtr loss = build_loss(p.spec);
  if (p.spike_depth > 0.0) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(loss->dim());
    if (p.spike_center.size() == 1) {
      center.setConstant(p.spike_center.front());
    } else if (!p.spike_center.empty()) {
      if (static_cast<Eigen::Index>(p.spike_center.size()) != loss->dim()) {
        throw ArgumentError("--spike-center needs 1 or " + std::to_string(loss->dim()) + " values");
      }
      center = Eigen::Map<const Eigen::VectorXd>(p.spike_center.data(), loss->dim());
    }
    loss = std::make_shared<const SpikedLoss>(loss, center, p.spike_radius, p.spike_depth);
  }
  if (p.clip_level) loss = clip(loss, *p.clip_level);
  return loss;
}

json stats_json(const SampleMoments& m) {
  return {{"count", m.count},      {"min", number(m.min)},     {"max", number(m.max)},
          {"mean", number(m.mean)}, {"l2_dev", number(m.l2_dev)}};
}

json phi_json(const PhiStats& s) {
  json j;
  j["family"] = s.family.kind == PlaneFamily::Kind::kUniform ? "uniform" : "conditioned";
  if (s.family.kind == PlaneFamily::Kind::kConditioned) j["anchor"] = vector_json(s.family.anchor);
  j["samples"] = s.samples;
  j["alpha_min_hat"] = number(s.alpha_min_hat);
  j["alpha_max_hat"] = number(s.alpha_max_hat);
  j["mean_hat"] = number(s.mean_hat);
  j["l2_dev_hat"] = number(s.l2_dev_hat);
  j["delta_hat"] = number(s.delta_hat);
  j["solver_evals"] = s.solver_evals;
  j["plug_in_estimate"] = true;
  return j;
}

json gap_json(const GapEstimate& g) {
  json j;
  json anchors = json::array();
  for (const AnchorRatio& a : g.anchors) {
    anchors.push_back({{"anchor_norm", number(a.anchor.norm())},
                       {"ratio", number(a.ratio)},
                       {"phi", stats_json(a.moments)}});
  }
  j["anchors"] = std::move(anchors);
  j["skipped_degenerate"] = g.skipped_degenerate;
  j["theta_hat"] = number(g.theta_hat);
  j["T"] = g.T;
  j["theta_T_hat"] = number(g.theta_T_hat);
  j["upper_biased"] = true;
  return j;
}

json level_set_json(const LevelSetReport& r) {
  return {{"alpha_prime", number(r.alpha_prime)},
          {"samples", r.samples},
          {"f", stats_json(r.f)},
          {"u_measure_hat", number(r.u_measure_hat)},
          {"u_limit", number(r.u_limit)},
          {"delta", number(r.delta)},
          {"threshold", number(r.threshold)},
          {"measure_hat", number(r.measure_hat)},
          {"bound", number(r.bound)},
          {"ci_half_width", number(r.ci_half_width)},
          {"status", to_string(r.status)}};
}

json best_of_t_json(const BestOfTReport& r) {
  return {{"T", r.T},
          {"trials", r.trials},
          {"calibration_samples", r.calibration_samples},
          {"delta", number(r.delta)},
          {"threshold", number(r.threshold)},
          {"rate", number(r.rate)},
          {"bound", number(r.bound)},
          {"ci_half_width", number(r.ci_half_width)},
          {"status", to_string(r.status)}};
}

json prediction_json(const BoundPrediction& p) {
  json j{{"rate_bound", number(p.rate_bound)},
         {"predicted_iterations", p.predicted_iterations},
         {"success_probability", number(p.success_probability)}};
  j["T_for_half"] = p.T_for_half ? json(*p.T_for_half) : json(nullptr);
  return j;
}

json walk_result_json(const WalkResult& r, bool emit_iterates) {
  json j{{"final_loss", number(r.loss)},
         {"rounds", r.rounds},
         {"loss_evals", r.loss_evals},
         {"initial_loss", number(r.trace.initial_loss)},
         {"termination", to_string(r.trace.termination)}};
  if (emit_iterates) j["x"] = vector_json(r.x);
  return j;
}

// Every output file gets a sibling manifest holding the resolved
// configuration; timestamps live only there so outputs stay byte-stable.
struct Manifest {
  json doc;

  Manifest(const std::string& command, const std::vector<std::string>& args,
           const CLI::App* sub, const Common& c) {
    doc["tool"] = "grasswalk";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["args"] = args;
    doc["seed"] = c.seed;
    doc["threads"] = c.threads;
    doc["config"] = sub->config_to_str(true, false);
    doc["started_at"] = utc_now();
  }

  void finish(const fs::path& path, const std::vector<std::string>& outputs, json result) {
    doc["outputs"] = outputs;
    doc["result"] = std::move(result);
    doc["finished_at"] = utc_now();
    write_file_atomic(path, doc.dump(2) + "\n");
  }
};

fs::path manifest_path_for(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

int cmd_run(const CLI::App* sub, const std::vector<std::string>& args, const Common& c,
            const ProblemOpts& p, const SolverSpec& s, WalkOpts w, std::ostream& out) {
  Manifest manifest("run", args, sub, c);
  const LossPtr loss = make_loss(p);
  const SolverPtr solver = build_solver(s);
  w.cfg.seed = c.seed;
  w.cfg.threads = c.threads;
  w.cfg.conditioned_mode = conditioned_mode_from_string(w.mode);
  const RngStream root(c.seed);
  if (start_mode_from_string(w.start) == StartMode::kGaussian) {
    RngStream x0_rng = root.child(0);
    w.cfg.x0 = x0_rng.normal_vector(loss->dim());
  }
  const WalkResult result = run_walk(loss, w.cfg, *solver, root);

  const fs::path trace_path = c.out;
  write_file_atomic(trace_path, trace_to_jsonl(result.trace, c.emit_iterates));
  manifest.finish(manifest_path_for(trace_path), {trace_path.string()},
                  walk_result_json(result, c.emit_iterates));
  out << "loss=" << format_double(result.loss) << " rounds=" << result.rounds
      << " evals=" << result.loss_evals << " termination=" << to_string(result.trace.termination)
      << " trace=" << trace_path.string() << "\n";
  return kExitOk;
}

struct StudyOpts {
  std::string preset;
  std::string kind = "trial";
  int trials = 10;
  double tolerance = 1e-4;
  bool absolute = false;
  std::optional<double> optimum;
  double alpha_prime = 0.0;
  bool no_traces = false;
};

json study_summary_json(const StudySummary& s) {
  return {{"trials", s.trials},
          {"successes", s.successes},
          {"optimum", number(s.optimum)},
          {"tolerance", number(s.tolerance)},
          {"success_rate", number(s.success_rate)},
          {"ci_low", number(s.ci_low)},
          {"ci_high", number(s.ci_high)},
          {"loss_min", number(s.loss_min)},
          {"loss_q25", number(s.loss_q25)},
          {"loss_median", number(s.loss_median)},
          {"loss_q75", number(s.loss_q75)},
          {"loss_max", number(s.loss_max)},
          {"mean_rounds", number(s.mean_rounds)},
          {"mean_evals", number(s.mean_evals)}};
}

json blindspot_summary_json(const BlindSpotSummary& s) {
  return {{"trials", s.trials},
          {"hits", s.hits},
          {"hit_frequency", number(s.hit_frequency)},
          {"max_abs_loss_diff_nonhitting", number(s.max_abs_loss_diff_nonhitting)},
          {"nonhitting_identical", s.nonhitting_identical}};
}

bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

std::string trial_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%04d", t);
  return buf;
}

int cmd_study(const CLI::App* sub, const std::vector<std::string>& args, const Common& c,
              const ProblemOpts& p, const SolverSpec& s, const WalkOpts& w, const StudyOpts& so,
              std::ostream& out) {
  Manifest manifest("study", args, sub, c);

  StudyPreset study;
  if (!so.preset.empty()) {
    study = study_preset(so.preset);
  } else if (so.kind == "blindspot") {
    BlindSpotStudy b;
    b.base = p.spec;
    if (!(p.spike_depth > 0.0)) throw ArgumentError("blind-spot study needs --spike-depth > 0");
    ProblemOpts spike_only = p;
    spike_only.clip_level.reset();
    const auto spiked = std::dynamic_pointer_cast<const SpikedLoss>(make_loss(spike_only));
    b.spike_center = spiked->center();
    b.spike_radius = p.spike_radius;
    b.spike_depth = p.spike_depth;
    b.alpha_prime = so.alpha_prime;
    b.solver = s;
    b.walk = w.cfg;
    b.walk.conditioned_mode = conditioned_mode_from_string(w.mode);
    b.start = start_mode_from_string(w.start);
    b.num_trials = so.trials;
    study = b;
  } else {
    if (p.spike_depth > 0.0 || p.clip_level) {
      throw ArgumentError("trial studies take plain built-in problems; use --kind blindspot");
    }
    TrialStudy t;
    t.problem = p.spec;
    t.solver = s;
    t.walk = w.cfg;
    t.walk.conditioned_mode = conditioned_mode_from_string(w.mode);
    t.start = start_mode_from_string(w.start);
    t.num_trials = so.trials;
    t.success_tolerance = so.tolerance;
    t.relative_tolerance = !so.absolute;
    t.optimum = so.optimum;
    study = t;
  }

  // Explicit flags (or config keys) override preset values.
  auto override_walk = [&](WalkConfig& cfg, SolverSpec& solver, int& trials, StartMode& start) {
    if (given(sub, "--k")) cfg.k = w.cfg.k;
    if (given(sub, "--T")) cfg.T = w.cfg.T;
    if (given(sub, "--epsilon")) cfg.epsilon_a = w.cfg.epsilon_a;
    if (given(sub, "--max-rounds")) cfg.max_rounds = w.cfg.max_rounds;
    if (given(sub, "--mode")) cfg.conditioned_mode = conditioned_mode_from_string(w.mode);
    if (given(sub, "--start")) start = start_mode_from_string(w.start);
    if (given(sub, "--anchored-start")) cfg.anchored_start = w.cfg.anchored_start;
    if (given(sub, "--budget-only")) cfg.budget_only = w.cfg.budget_only;
    if (given(sub, "--solver")) solver.kind = s.kind;
    if (given(sub, "--m")) solver.shrink.num_scales = s.shrink.num_scales;
    if (given(sub, "--r")) solver.shrink.proposals_per_scale = s.shrink.proposals_per_scale;
    if (given(sub, "--s0")) solver.shrink.initial_scale = s.shrink.initial_scale;
    if (given(sub, "--nm-step")) solver.nelder_mead.initial_step = s.nelder_mead.initial_step;
    if (given(sub, "--nm-max-evals")) solver.nelder_mead.max_evals = s.nelder_mead.max_evals;
    if (given(sub, "--trials")) trials = so.trials;
  };

  const fs::path dir = c.out;
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  json result;
  const RngStream root(c.seed);

  if (auto* t = std::get_if<TrialStudy>(&study)) {
    if (!so.preset.empty()) {
      override_walk(t->walk, t->solver, t->num_trials, t->start);
      if (given(sub, "--tol")) t->success_tolerance = so.tolerance;
      if (given(sub, "--absolute")) t->relative_tolerance = !so.absolute;
      if (given(sub, "--optimum")) t->optimum = so.optimum;
    }
    const StudySummary summary = run_study(*t, root, c.threads);
    write_file_atomic(dir / "summary.csv", summary_csv(summary));
    result = study_summary_json(summary);
    write_file_atomic(dir / "summary.json", result.dump(2) + "\n");
    outputs = {(dir / "summary.csv").string(), (dir / "summary.json").string()};
    if (!so.no_traces) {
      for (const TrialOutcome& o : summary.outcomes) {
        const fs::path tp = dir / "traces" / (trial_name(o.trial) + ".jsonl");
        write_file_atomic(tp, trace_to_jsonl(o.walk.trace, c.emit_iterates));
        outputs.push_back(tp.string());
      }
    }
    out << "success_rate=" << format_double(summary.success_rate) << " (" << summary.successes
        << "/" << summary.trials << ") median_loss=" << format_double(summary.loss_median)
        << " mean_rounds=" << format_double(summary.mean_rounds) << " out=" << dir.string()
        << "\n";
  } else {
    auto& b = std::get<BlindSpotStudy>(study);
    if (!so.preset.empty()) {
      override_walk(b.walk, b.solver, b.num_trials, b.start);
      if (given(sub, "--alpha-prime")) b.alpha_prime = so.alpha_prime;
    }
    const BlindSpotSummary summary = run_blindspot_study(b, root, c.threads);
    write_file_atomic(dir / "summary.csv", blindspot_csv(summary));
    result = blindspot_summary_json(summary);
    write_file_atomic(dir / "summary.json", result.dump(2) + "\n");
    outputs = {(dir / "summary.csv").string(), (dir / "summary.json").string()};
    if (!so.no_traces) {
      for (const BlindSpotOutcome& o : summary.outcomes) {
        const fs::path base = dir / "traces" / trial_name(o.trial);
        fs::path plain = base;
        plain += ".plain.jsonl";
        fs::path clipped = base;
        clipped += ".clipped.jsonl";
        write_file_atomic(plain, trace_to_jsonl(o.coupled.plain.trace, c.emit_iterates));
        write_file_atomic(clipped, trace_to_jsonl(o.coupled.clipped.trace, c.emit_iterates));
        outputs.push_back(plain.string());
        outputs.push_back(clipped.string());
      }
    }
    out << "hit_frequency=" << format_double(summary.hit_frequency) << " (" << summary.hits << "/"
        << summary.trials << ") nonhitting_identical="
        << (summary.nonhitting_identical ? "true" : "false") << " out=" << dir.string() << "\n";
  }
  manifest.finish(dir / "manifest.json", outputs, result);
  return kExitOk;
}

struct GapOpts {
  std::string analysis = "phi";
  std::string family = "uniform";
  std::vector<double> anchor;
  std::size_t samples = 10000;
  std::size_t anchors = 16;
  std::size_t planes_per_anchor = 64;
  double anchor_radius = 1.0;
  double alpha_prime = 0.0;
};

int cmd_gap(const CLI::App* sub, const std::vector<std::string>& args, const Common& c,
            const ProblemOpts& p, const SolverSpec& s, const WalkOpts& w, const GapOpts& g,
            std::ostream& out) {
  Manifest manifest("gap", args, sub, c);
  const LossPtr loss = make_loss(p);
  const SolverPtr solver = build_solver(s);
  const RngStream root(c.seed);
  json report;
  report["analysis"] = g.analysis;
  report["loss"] = loss->name();
  report["k"] = w.cfg.k;

  if (g.analysis == "phi") {
    PlaneFamily family = PlaneFamily::uniform();
    if (g.family == "conditioned") {
      if (static_cast<Eigen::Index>(g.anchor.size()) != loss->dim()) {
        throw ArgumentError("--anchor needs " + std::to_string(loss->dim()) + " values");
      }
      family = PlaneFamily::conditioned(
          Eigen::Map<const Eigen::VectorXd>(g.anchor.data(), loss->dim()),
          conditioned_mode_from_string(w.mode));
    }
    const PhiStats stats =
        estimate_phi_stats(loss, family, w.cfg.k, g.samples, *solver, root, c.threads);
    report["phi"] = phi_json(stats);
    out << "delta_hat=" << format_double(stats.delta_hat)
        << " mean_hat=" << format_double(stats.mean_hat) << "\n";
  } else if (g.analysis == "gap") {
    const GapConfig cfg{w.cfg.k, g.planes_per_anchor, w.cfg.T, c.threads};
    const GapEstimate est = estimate_gap(loss, gaussian_anchor_sampler(loss->dim(), g.anchor_radius),
                                         g.anchors, cfg, *solver, root);
    report["gap"] = gap_json(est);
    out << "theta_hat=" << format_double(est.theta_hat)
        << " theta_T_hat=" << format_double(est.theta_T_hat) << "\n";
  } else {
    ClippedAnalysisConfig cfg;
    cfg.k = w.cfg.k;
    cfg.samples = g.samples;
    cfg.anchors = g.anchors;
    cfg.planes_per_anchor = g.planes_per_anchor;
    cfg.anchor_radius = g.anchor_radius;
    cfg.T = w.cfg.T;
    cfg.threads = c.threads;
    const ClippedAnalysis ca = clipped_analysis(loss, g.alpha_prime, cfg, *solver, root);
    report["alpha_prime"] = number(ca.alpha_prime);
    report["phi"] = phi_json(ca.phi);
    if (ca.gap) report["gap"] = gap_json(*ca.gap);
    out << "delta_alpha_hat=" << format_double(ca.phi.delta_hat);
    if (ca.gap) out << " theta_alpha_hat=" << format_double(ca.gap->theta_hat);
    out << "\n";
  }

  const fs::path path = c.out;
  write_file_atomic(path, report.dump(2) + "\n");
  manifest.finish(manifest_path_for(path), {path.string()}, report);
  return kExitOk;
}

struct VerifyOpts {
  std::string case_name = "sin-circle";
  std::size_t samples = 100000;
  std::vector<double> alpha_primes;
  std::vector<int> Ts{1, 5, 32};
  std::size_t trials = 20000;
  int torus_dim = 2;
};

int cmd_verify(const CLI::App* sub, const std::vector<std::string>& args, const Common& c,
               const VerifyOpts& v, std::ostream& out) {
  Manifest manifest("verify", args, sub, c);
  SampledFunction f;
  if (v.case_name == "sin-circle") {
    f = sin_circle();
  } else if (v.case_name == "sin-torus") {
    f = sin_torus(v.torus_dim);
  } else {
    // phi of |x - e1|^2 over lines in the plane: phi = sin^2 of a uniform angle
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(2);
    c1[0] = 1.0;
    f = phi_on_grassmannian(std::make_shared<const QuadraticLoss>(c1), 1,
                            std::make_shared<const ExactQuadratic>());
  }
  const RngStream root(c.seed);
  bool violated = false;
  json report;
  report["case"] = f.name;

  json level_sets = json::array();
  std::vector<std::optional<double>> alphas;
  if (!v.alpha_primes.empty()) {
    for (double a : v.alpha_primes) alphas.emplace_back(a);
  } else if (v.case_name == "sin-circle") {
    alphas = {-1.0, -0.99};
  } else {
    alphas = {std::nullopt};
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const RngStream rng = root.child({0, i});
    const LevelSetReport r = alphas[i] ? verify_level_set(f, *alphas[i], v.samples, rng, c.threads)
                                       : verify_level_set_at_min(f, v.samples, rng, c.threads);
    violated = violated || r.status == BoundStatus::kViolated;
    level_sets.push_back(level_set_json(r));
    out << "level_set alpha'=" << format_double(r.alpha_prime) << " delta="
        << format_double(r.delta) << " measure=" << format_double(r.measure_hat)
        << " bound=" << format_double(r.bound) << " " << to_string(r.status) << "\n";
  }
  report["level_set"] = std::move(level_sets);

  json best = json::array();
  for (std::size_t i = 0; i < v.Ts.size(); ++i) {
    const BestOfTReport r =
        verify_best_of_T(f, v.Ts[i], v.trials, root.child({1, i}), v.samples, c.threads);
    violated = violated || r.status == BoundStatus::kViolated;
    best.push_back(best_of_t_json(r));
    out << "best_of_T T=" << r.T << " rate=" << format_double(r.rate)
        << " bound=" << format_double(r.bound) << " " << to_string(r.status) << "\n";
  }
  report["best_of_T"] = std::move(best);
  report["violated"] = violated;

  const fs::path path = c.out;
  write_file_atomic(path, report.dump(2) + "\n");
  manifest.finish(manifest_path_for(path), {path.string()}, {{"violated", violated}});
  return violated ? kExitBoundViolated : kExitOk;
}

struct PredictOpts {
  std::optional<double> delta;
  std::optional<double> theta;
  std::optional<double> range;
  double epsilon = 1e-3;
  int T = 1;
  int n = 0;
  bool estimate = false;
  std::size_t samples = 2000;
  std::size_t anchors = 8;
  std::size_t planes_per_anchor = 64;
  double anchor_radius = 1.0;
};

int cmd_predict(const CLI::App* sub, const std::vector<std::string>& args, const Common& c,
                const ProblemOpts& p, const SolverSpec& s, const WalkOpts& w,
                const PredictOpts& po, std::ostream& out) {
  Manifest manifest("predict", args, sub, c);
  json report;
  double delta = po.delta.value_or(0.0);
  double theta = po.theta.value_or(0.0);
  double range = po.range.value_or(1.0);
  if (po.estimate) {
    const LossPtr loss = make_loss(p);
    const SolverPtr solver = build_solver(s);
    const RngStream root(c.seed);
    const PhiStats stats = estimate_phi_stats(loss, PlaneFamily::uniform(), w.cfg.k, po.samples,
                                              *solver, root.child(0), c.threads);
    const GapConfig cfg{w.cfg.k, po.planes_per_anchor, po.T, c.threads};
    const GapEstimate gap =
        estimate_gap(loss, gaussian_anchor_sampler(loss->dim(), po.anchor_radius), po.anchors, cfg,
                     *solver, root.child(1));
    if (!po.delta) delta = stats.delta_hat;
    if (!po.theta) theta = gap.theta_hat;
    if (!po.range) range = stats.alpha_max_hat - stats.alpha_min_hat;
    report["phi"] = phi_json(stats);
    report["gap"] = gap_json(gap);
    report["optimistic"] = true;
  } else if (!po.delta || !po.theta) {
    throw ArgumentError("predict needs --delta and --theta, or --estimate");
  }
  const BoundPrediction pred = predict_bounds(delta, theta, range, po.epsilon, po.T, po.n);
  report["inputs"] = {{"delta", number(delta)}, {"theta", number(theta)},
                      {"alpha_range", number(range)}, {"epsilon_a", number(po.epsilon)},
                      {"T", po.T}, {"n", po.n}};
  report["prediction"] = prediction_json(pred);

  const fs::path path = c.out;
  write_file_atomic(path, report.dump(2) + "\n");
  manifest.finish(manifest_path_for(path), {path.string()}, report["prediction"]);
  out << "predicted_iterations=" << pred.predicted_iterations
      << " rate_bound=" << format_double(pred.rate_bound)
      << " success_probability=" << format_double(pred.success_probability) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"grasswalk: random-subspace walk optimizer and verifiers", "grasswalk"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  auto formatter = std::make_shared<SectionedConfig>();
  app.config_formatter(formatter);
  app.set_config("--config", "", "TOML-style config file; flags override its values");

  for (const std::string& a : args) {
    if (std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end()) {
      formatter->set_target(a);
      break;
    }
  }

  Common run_c, study_c, gap_c, verify_c, predict_c;
  ProblemOpts run_p, study_p, gap_p, predict_p;
  SolverSpec run_s, study_s, gap_s, predict_s;
  WalkOpts run_w, study_w, gap_w, predict_w;
  StudyOpts study_o;
  GapOpts gap_o;
  VerifyOpts verify_o;
  PredictOpts predict_o;

  CLI::App* run_cmd = app.add_subcommand("run", "Run one random-subspace walk and write its trace");
  add_common(run_cmd, run_c, "trace.jsonl");
  add_problem(run_cmd, run_p);
  add_solver(run_cmd, run_s);
  add_walk(run_cmd, run_w);

  CLI::App* study_cmd = app.add_subcommand("study", "Run a repeated-trial or blind-spot study");
  add_common(study_cmd, study_c, "study_out");
  add_problem(study_cmd, study_p);
  add_solver(study_cmd, study_s);
  add_walk(study_cmd, study_w);
  study_cmd->add_option("--preset", study_o.preset, "Named study configuration")
      ->check(CLI::IsMember(preset_names()));
  study_cmd->add_option("--kind", study_o.kind, "trial | blindspot (without --preset)")
      ->check(CLI::IsMember({"trial", "blindspot"}))
      ->capture_default_str();
  study_cmd->add_option("--trials", study_o.trials, "Number of trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  study_cmd->add_option("--tol", study_o.tolerance, "Success tolerance")->capture_default_str();
  study_cmd->add_flag("--absolute", study_o.absolute, "Tolerance is absolute, not relative");
  study_cmd->add_option("--optimum", study_o.optimum, "Override the known optimum");
  study_cmd->add_option("--alpha-prime", study_o.alpha_prime, "Blind-spot clip level")
      ->capture_default_str();
  study_cmd->add_flag("--no-traces", study_o.no_traces, "Skip per-trial trace files");

  CLI::App* gap_cmd = app.add_subcommand("gap", "Estimate phi statistics, delta and the gap parameter");
  add_common(gap_cmd, gap_c, "gap_report.json");
  add_problem(gap_cmd, gap_p);
  add_solver(gap_cmd, gap_s);
  add_walk(gap_cmd, gap_w);
  gap_cmd->add_option("--analysis", gap_o.analysis, "phi | gap | clipped")
      ->check(CLI::IsMember({"phi", "gap", "clipped"}))
      ->capture_default_str();
  gap_cmd->add_option("--family", gap_o.family, "phi family: uniform | conditioned")
      ->check(CLI::IsMember({"uniform", "conditioned"}))
      ->capture_default_str();
  gap_cmd->add_option("--anchor", gap_o.anchor, "Anchor vector for the conditioned family");
  gap_cmd->add_option("--samples", gap_o.samples, "Planes sampled for phi")->capture_default_str();
  gap_cmd->add_option("--anchors", gap_o.anchors, "Anchors for the gap estimate")
      ->capture_default_str();
  gap_cmd->add_option("--planes-per-anchor", gap_o.planes_per_anchor, "Planes per anchor")
      ->capture_default_str();
  gap_cmd->add_option("--anchor-radius", gap_o.anchor_radius, "Scale of Gaussian anchors")
      ->capture_default_str();
  gap_cmd->add_option("--alpha-prime", gap_o.alpha_prime, "Clip level for --analysis clipped")
      ->capture_default_str();

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "Check the level-set and best-of-T bounds on analytic cases");
  add_common(verify_cmd, verify_c, "verify_report.json");
  verify_cmd->add_option("--case", verify_o.case_name, "sin-circle | sin-torus | phi-line")
      ->check(CLI::IsMember({"sin-circle", "sin-torus", "phi-line"}))
      ->capture_default_str();
  verify_cmd->add_option("--samples", verify_o.samples, "Samples per estimate")
      ->capture_default_str();
  verify_cmd->add_option("--alpha-prime", verify_o.alpha_primes, "Exceptional-set levels");
  verify_cmd->add_option("--T", verify_o.Ts, "Best-of-T sizes")->capture_default_str();
  verify_cmd->add_option("--trials", verify_o.trials, "Best-of-T trials")->capture_default_str();
  verify_cmd->add_option("--torus-dim", verify_o.torus_dim, "Torus dimension for sin-torus")
      ->capture_default_str();

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Evaluate the convergence bounds from delta and theta");
  add_common(predict_cmd, predict_c, "prediction.json");
  add_problem(predict_cmd, predict_p);
  add_solver(predict_cmd, predict_s);
  add_walk(predict_cmd, predict_w);
  predict_cmd->add_option("--delta", predict_o.delta, "delta");
  predict_cmd->add_option("--theta", predict_o.theta, "Gap parameter");
  predict_cmd->add_option("--range", predict_o.range, "alpha_max - alpha_min");
  predict_cmd->add_option("--rounds", predict_o.n, "Rounds after the first (n)")
      ->capture_default_str();
  predict_cmd->add_flag("--estimate", predict_o.estimate, "Estimate delta/theta/range by sampling");
  predict_cmd->add_option("--samples", predict_o.samples, "Planes for phi when estimating")
      ->capture_default_str();
  predict_cmd->add_option("--anchors", predict_o.anchors, "Anchors when estimating")
      ->capture_default_str();
  predict_cmd->add_option("--planes-per-anchor", predict_o.planes_per_anchor, "Planes per anchor")
      ->capture_default_str();
  predict_cmd->add_option("--anchor-radius", predict_o.anchor_radius, "Scale of Gaussian anchors")
      ->capture_default_str();
  // --T and --epsilon come from add_walk.

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    if (code == 0) return kExitOk;
    return kExitBadConfig;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_cmd, args, run_c, run_p, run_s, run_w, out);
    if (study_cmd->parsed()) {
      return cmd_study(study_cmd, args, study_c, study_p, study_s, study_w, study_o, out);
    }
    if (gap_cmd->parsed()) return cmd_gap(gap_cmd, args, gap_c, gap_p, gap_s, gap_w, gap_o, out);
    if (verify_cmd->parsed()) return cmd_verify(verify_cmd, args, verify_c, verify_o, out);
    if (predict_cmd->parsed()) {
      predict_o.T = predict_w.cfg.T;
      if (predict_cmd->get_option("--epsilon")->count() == 0) predict_w.cfg.epsilon_a = 1e-3;
      predict_o.epsilon = predict_w.cfg.epsilon_a;
      return cmd_predict(predict_cmd, args, predict_c, predict_p, predict_s, predict_w, predict_o,
                         out);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitBadConfig;
}

}  // namespace grasswalk::cli
