#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "grasswalk/analysis.hpp"
#include "grasswalk/bench.hpp"
#include "grasswalk/cli.hpp"
#include "grasswalk/errors.hpp"
#include "grasswalk/geometry.hpp"
#include "grasswalk/objectives.hpp"
#include "grasswalk/solvers.hpp"
#include "grasswalk/trace_io.hpp"
#include "grasswalk/walk.hpp"

namespace py = pybind11;
using namespace grasswalk;

namespace {

// pybind11 holders cannot be pointer-to-const
using PyLoss = std::shared_ptr<LossFunction>;

PyLoss wrap(LossPtr p) { return std::const_pointer_cast<LossFunction>(std::move(p)); }

// Python callables may be invoked from worker threads with the GIL released.
PyLoss python_loss(Eigen::Index dim, py::function fn, std::string name) {
  std::shared_ptr<py::function> holder(new py::function(std::move(fn)), [](py::function* f) {
    py::gil_scoped_acquire gil;
    delete f;
  });
  auto call = [holder](const Eigen::VectorXd& x) {
    py::gil_scoped_acquire gil;
    return (*holder)(x).cast<double>();
  };
  return wrap(std::make_shared<const FunctionLoss>(dim, call, std::move(name)));
}

SolverPtr solver_from(const std::string& kind, int m, int r, double s0, int nm_max_evals) {
  SolverSpec spec;
  spec.kind = kind;
  spec.shrink = {m, r, s0};
  spec.nelder_mead.max_evals = nm_max_evals;
  return build_solver(spec);
}

py::dict round_dict(const RoundRecord& r) {
  py::dict d;
  d["round"] = r.round;
  d["loss"] = r.loss;
  d["x"] = r.x;
  d["accepted_from_sample"] = r.chosen_sample;
  d["sample_minima"] = r.sample_minima;
  d["solver_evals"] = r.solver_evals;
  d["min_evaluated"] = r.min_evaluated;
  d["flags"] = r.flags;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random-subspace walks on Grassmannians";
  m.attr("__version__") = cli::kVersion;

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);

  py::class_<LossFunction, PyLoss>(m, "Loss")
      .def("__call__", &LossFunction::eval)
      .def_property_readonly("dim", &LossFunction::dim)
      .def_property_readonly("name", &LossFunction::name)
      .def_property_readonly("known_optimum", &LossFunction::known_optimum);

  m.def("quadratic", [](Eigen::VectorXd c) -> PyLoss {
    return wrap(std::make_shared<const QuadraticLoss>(std::move(c)));
  }, py::arg("center"), "|x - c|^2");
  m.def("rastrigin", [](Eigen::VectorXd s) -> PyLoss {
    return wrap(std::make_shared<const RastriginLoss>(std::move(s)));
  }, py::arg("shift"));
  m.def("ackley", [](Eigen::VectorXd s) -> PyLoss {
    return wrap(std::make_shared<const AckleyLoss>(std::move(s)));
  }, py::arg("shift"));
  m.def("thomson", [](int N, int n) -> PyLoss {
    return wrap(std::make_shared<const ThomsonProblem>(N, n));
  }, py::arg("num_points"), py::arg("sphere_dim") = 2);
  m.def("function_loss", &python_loss, py::arg("dim"), py::arg("fn"),
        py::arg("name") = "function", "Wrap a Python callable R^d -> float");
  m.def("clip", [](PyLoss base, double a) -> PyLoss { return wrap(clip(std::move(base), a)); },
        py::arg("loss"), py::arg("alpha_prime"));
  m.def("spiked", [](PyLoss base, Eigen::VectorXd c, double radius, double depth) -> PyLoss {
    return wrap(std::make_shared<const SpikedLoss>(std::move(base), std::move(c), radius, depth));
  }, py::arg("loss"), py::arg("center"), py::arg("radius"), py::arg("depth"));
  m.def("stereo", &stereo, py::arg("y"));
  m.def("thomson_s2_optimum", &thomson_s2_optimum, py::arg("num_points"));

  m.def("sample_uniform", [](Eigen::Index d, Eigen::Index k, std::uint64_t seed) {
    RngStream rng(seed);
    return sample_uniform(d, k, rng).basis();
  }, py::arg("d"), py::arg("k"), py::arg("seed") = 0,
        "Orthonormal d x k basis of a Haar-random k-plane");
  m.def("sample_conditioned", [](const Eigen::VectorXd& x, Eigen::Index k, std::uint64_t seed,
                                 const std::string& mode) {
    RngStream rng(seed);
    return sample_conditioned(x, k, rng, conditioned_mode_from_string(mode)).basis();
  }, py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("mode") = "invariant");

  m.def("run_walk",
        [](PyLoss loss, int k, int T, double epsilon, int max_rounds, std::uint64_t seed,
           std::optional<Eigen::VectorXd> x0, const std::string& solver, int m_, int r_,
           double s0, int nm_max_evals, const std::string& mode, bool anchored_start,
           bool budget_only, int threads) {
          WalkConfig cfg;
          cfg.k = k;
          cfg.T = T;
          cfg.epsilon_a = epsilon;
          cfg.max_rounds = max_rounds;
          cfg.seed = seed;
          cfg.x0 = std::move(x0);
          cfg.conditioned_mode = conditioned_mode_from_string(mode);
          cfg.anchored_start = anchored_start;
          cfg.budget_only = budget_only;
          cfg.threads = threads;
          const SolverPtr s = solver_from(solver, m_, r_, s0, nm_max_evals);
          WalkResult res;
          {
            py::gil_scoped_release release;
            res = run_walk(loss, cfg, *s);
          }
          py::dict out;
          out["x"] = res.x;
          out["loss"] = res.loss;
          out["rounds"] = res.rounds;
          out["loss_evals"] = res.loss_evals;
          out["initial_loss"] = res.trace.initial_loss;
          out["termination"] = to_string(res.trace.termination);
          py::list rounds;
          for (const RoundRecord& r : res.trace.rounds) rounds.append(round_dict(r));
          out["trace"] = rounds;
          out["trace_jsonl"] = trace_to_jsonl(res.trace, true);
          return out;
        },
        py::arg("loss"), py::arg("k") = 2, py::arg("T") = 1, py::arg("epsilon") = 1e-9,
        py::arg("max_rounds") = 1000, py::arg("seed") = 0, py::arg("x0") = std::nullopt,
        py::arg("solver") = "shrink", py::arg("m") = 20, py::arg("r") = 1, py::arg("s0") = 1.0,
        py::arg("nm_max_evals") = 2000, py::arg("mode") = "invariant",
        py::arg("anchored_start") = false, py::arg("budget_only") = false,
        py::arg("threads") = 1);

  m.def("phi_stats",
        [](PyLoss loss, int k, std::size_t samples, const std::string& solver, int m_, int r_,
           std::uint64_t seed, std::optional<Eigen::VectorXd> anchor, int threads) {
          const SolverPtr s = solver_from(solver, m_, r_, 1.0, 2000);
          const PlaneFamily fam = anchor ? PlaneFamily::conditioned(*anchor) : PlaneFamily::uniform();
          PhiStats st;
          {
            py::gil_scoped_release release;
            st = estimate_phi_stats(loss, fam, k, samples, *s, RngStream(seed), threads);
          }
          py::dict d;
          d["alpha_min_hat"] = st.alpha_min_hat;
          d["alpha_max_hat"] = st.alpha_max_hat;
          d["mean_hat"] = st.mean_hat;
          d["l2_dev_hat"] = st.l2_dev_hat;
          d["delta_hat"] = st.delta_hat;
          d["samples"] = st.samples;
          return d;
        },
        py::arg("loss"), py::arg("k"), py::arg("samples") = 10000, py::arg("solver") = "shrink",
        py::arg("m") = 20, py::arg("r") = 1, py::arg("seed") = 0,
        py::arg("anchor") = std::nullopt, py::arg("threads") = 1);

  m.def("estimate_gap",
        [](PyLoss loss, int k, std::size_t anchors, std::size_t planes_per_anchor, int T,
           double anchor_radius, const std::string& solver, int m_, int r_, std::uint64_t seed,
           int threads) {
          const SolverPtr s = solver_from(solver, m_, r_, 1.0, 2000);
          GapEstimate g;
          {
            py::gil_scoped_release release;
            g = estimate_gap(loss, gaussian_anchor_sampler(loss->dim(), anchor_radius), anchors,
                             GapConfig{k, planes_per_anchor, T, threads}, *s, RngStream(seed));
          }
          std::vector<double> ratios;
          for (const AnchorRatio& a : g.anchors) ratios.push_back(a.ratio);
          py::dict d;
          d["theta_hat"] = g.theta_hat;
          d["theta_T_hat"] = g.theta_T_hat;
          d["ratios"] = ratios;
          d["skipped_degenerate"] = g.skipped_degenerate;
          return d;
        },
        py::arg("loss"), py::arg("k"), py::arg("anchors") = 16, py::arg("planes_per_anchor") = 64,
        py::arg("T") = 1, py::arg("anchor_radius") = 1.0, py::arg("solver") = "shrink",
        py::arg("m") = 20, py::arg("r") = 1, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("verify_sin_circle",
        [](double alpha_prime, std::size_t samples, std::uint64_t seed) {
          const LevelSetReport r = verify_level_set(sin_circle(), alpha_prime, samples, RngStream(seed));
          py::dict d;
          d["delta"] = r.delta;
          d["measure_hat"] = r.measure_hat;
          d["bound"] = r.bound;
          d["threshold"] = r.threshold;
          d["status"] = to_string(r.status);
          return d;
        },
        py::arg("alpha_prime") = -1.0, py::arg("samples") = 100000, py::arg("seed") = 0);

  m.def("predict_bounds",
        [](double delta, double theta, double alpha_range, double epsilon, int T, int n) {
          const BoundPrediction p = predict_bounds(delta, theta, alpha_range, epsilon, T, n);
          py::dict d;
          d["rate_bound"] = p.rate_bound;
          d["predicted_iterations"] = p.predicted_iterations;
          d["success_probability"] = p.success_probability;
          d["T_for_half"] = p.T_for_half;
          return d;
        },
        py::arg("delta"), py::arg("theta"), py::arg("alpha_range") = 1.0,
        py::arg("epsilon") = 1e-3, py::arg("T") = 1, py::arg("n") = 0);

  m.def("preset_names", &preset_names);
  m.def("run_preset",
        [](const std::string& name, std::optional<int> trials, std::optional<int> max_rounds,
           std::uint64_t seed, int threads) {
          StudyPreset p = study_preset(name);
          py::dict d;
          if (auto* t = std::get_if<TrialStudy>(&p)) {
            if (trials) t->num_trials = *trials;
            if (max_rounds) t->walk.max_rounds = *max_rounds;
            StudySummary s;
            {
              py::gil_scoped_release release;
              s = run_study(*t, RngStream(seed), threads);
            }
            std::vector<double> losses;
            for (const TrialOutcome& o : s.outcomes) losses.push_back(o.final_loss);
            d["kind"] = "trial";
            d["success_rate"] = s.success_rate;
            d["successes"] = s.successes;
            d["trials"] = s.trials;
            d["optimum"] = s.optimum;
            d["final_losses"] = losses;
          } else {
            auto& b = std::get<BlindSpotStudy>(p);
            if (trials) b.num_trials = *trials;
            if (max_rounds) b.walk.max_rounds = *max_rounds;
            BlindSpotSummary s;
            {
              py::gil_scoped_release release;
              s = run_blindspot_study(b, RngStream(seed), threads);
            }
            d["kind"] = "blindspot";
            d["hits"] = s.hits;
            d["trials"] = s.trials;
            d["hit_frequency"] = s.hit_frequency;
            d["nonhitting_identical"] = s.nonhitting_identical;
          }
          return d;
        },
        py::arg("name"), py::arg("trials") = std::nullopt, py::arg("max_rounds") = std::nullopt,
        py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run the command-line tool in-process; returns (code, stdout, stderr)");
}
