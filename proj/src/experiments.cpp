#include "qpercept/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qpercept/bounds.hpp"
#include "qpercept/ensemble.hpp"
#include "qpercept/gaussian.hpp"
#include "qpercept/operators.hpp"
#include "qpercept/result_table.hpp"

namespace qpercept {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Errors raised while reading parameters are configuration errors, whatever
// their concrete type.
template <typename F>
auto validated(F&& f) {
  try {
    return f();
  } catch (const InvalidConfig&) {
    throw;
  } catch (const Error& e) {
    throw InvalidConfig(e.what());
  }
}

std::uint64_t steps_for(double T, double dt, const std::string& what) {
  if (!(dt > 0.0)) throw InvalidConfig(what + ": dt must be positive");
  if (!(T > 0.0)) throw InvalidConfig(what + ": T must be positive");
  double n = T / dt;
  double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6 * rounded) {
    throw InvalidConfig(what + ": T must be a multiple of dt");
  }
  return static_cast<std::uint64_t>(rounded);
}

std::size_t trajectories(const ConfigSection& cfg, const RunOptions& opts,
                         std::size_t fallback) {
  std::size_t n = cfg.count("n_trajectories", fallback);
  if (opts.trajectories) n = *opts.trajectories;
  if (n < 2) throw InvalidConfig("n_trajectories must be at least 2");
  return n;
}

std::uint64_t seed(const ConfigSection& cfg, const RunOptions& opts) {
  std::uint64_t s = cfg.count("seed", 1);
  return opts.seed ? *opts.seed : s;
}

void say(const RunOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << "\n";
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

void record(CommandResult& result, const RunOptions& opts, std::string name,
            bool passed, std::string detail) {
  say(opts, std::string(passed ? "PASS " : "FAIL ") + name + "  " + detail);
  result.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::filesystem::path output(const RunOptions& opts, const std::string& file) {
  std::filesystem::create_directories(opts.out_dir);
  return opts.out_dir / file;
}

void write_table(CommandResult& result, const RunOptions& opts,
                 const ResultTable& table, const std::string& file) {
  auto path = output(opts, file);
  table.write(path);
  result.files.push_back(path);
}

void write_summary(CommandResult& result, const RunOptions& opts,
                   const std::string& experiment, const ConfigSection& cfg,
                   json params, Clock::time_point start, json extra = {}) {
  json j;
  j["experiment"] = experiment;
  j["config"] = cfg.entries();
  j["parameters"] = std::move(params);
  j["wall_time_s"] =
      std::chrono::duration<double>(Clock::now() - start).count();
  json checks = json::array();
  std::size_t failed = 0;
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed) ++failed;
  }
  j["checks"] = std::move(checks);
  j["n_failed"] = failed;
  j["passed"] = failed == 0;
  std::vector<std::string> files;
  for (const auto& f : result.files) files.push_back(f.filename().string());
  j["files"] = files;
  if (!extra.is_null()) j["details"] = std::move(extra);
  auto path = output(opts, experiment + "_summary.json");
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  result.files.push_back(path);
}

std::string eta_tag(double eta) {
  std::ostringstream s;
  s << eta;
  return s.str();
}

AgentSpec agent_for(double eta) {
  if (eta == 0.0) return AgentSpec::blind();
  return AgentSpec::partial(eta);
}

// Summarizes the bound checks of one subject as a single verdict.
void summarize_checks(CommandResult& result, const RunOptions& opts,
                      const EnsembleReport& report, const std::string& subject,
                      const std::string& bound, const std::string& name) {
  std::size_t n = 0, failed = 0;
  double worst = 0.0, worst_t = 0.0;
  for (const auto& c : report.bound_checks) {
    if (c.subject != subject || c.bound != bound) continue;
    ++n;
    double excess = -c.margin - c.tolerance;
    if (!c.satisfied) ++failed;
    if (n == 1 || excess > worst) {
      worst = excess;
      worst_t = c.t;
    }
  }
  std::ostringstream detail;
  detail << failed << "/" << n << " times outside tolerance; largest excess "
         << std::setprecision(4) << worst << " at t=" << worst_t;
  record(result, opts, name, failed == 0, detail.str());
}

}  // namespace

bool CommandResult::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

CommandResult cmd_jz(const ConfigSection& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  struct Params {
    long dim;
    std::vector<double> etas;
    double tau_m, T, dt, std_dev;
    std::uint64_t n_steps, stride, seed;
    std::size_t n;
    bool per_trajectory;
  };
  Params p = validated([&] {
    Params q;
    q.dim = static_cast<long>(cfg.count("dim", 50));
    if (q.dim < 2) throw InvalidConfig("[jz] dim must be at least 2");
    q.etas = cfg.numbers("eta", {0.0, 0.5, 0.9});
    for (double e : q.etas) {
      if (!(e >= 0.0 && e <= 1.0)) throw InvalidConfig("[jz] eta entries must lie in [0, 1]");
    }
    q.tau_m = cfg.number("tau_m", 1.0);
    if (!(q.tau_m > 0.0)) throw InvalidConfig("[jz] tau_m must be positive");
    q.T = cfg.number("T", 4.0);
    q.dt = cfg.number("dt", 1e-3);
    q.n_steps = steps_for(q.T, q.dt, "[jz]");
    q.stride = cfg.count("sample_stride", 100);
    if (q.stride == 0) throw InvalidConfig("[jz] sample_stride must be positive");
    q.std_dev = cfg.number("initial_std", std::sqrt(static_cast<double>(q.dim) / 4.0));
    if (!(q.std_dev > 0.0)) throw InvalidConfig("[jz] initial_std must be positive");
    q.n = trajectories(cfg, opts, 100);
    q.seed = seed(cfg, opts);
    q.per_trajectory = cfg.flag("per_trajectory", false);
    cfg.reject_unread();
    return q;
  });

  EnsembleConfig ec = validated([&] {
    Matrix jz = ops::angular_momentum_z(p.dim);
    SimulationConfig sim(ObservableOperator(Matrix::Zero(p.dim, p.dim)),
                         {MeasurementChannel(ObservableOperator(jz), p.tau_m)},
                         p.dt, p.n_steps, p.seed);
    DensityOperator psi = DensityOperator::pure(
        ops::gaussian_level_state(ops::angular_momentum_levels(p.dim), 0.0, p.std_dev));
    std::vector<AgentSpec> agents;
    for (double e : p.etas) agents.push_back(agent_for(e));
    return EnsembleConfig{std::move(sim), std::move(psi), p.n, std::move(agents),
                          {Metric::TraceDistance, Metric::RelativeEntropy,
                           Metric::Purity, Metric::Entropy, Metric::Bounds},
                          p.stride, Unraveling::Kraus, opts.threads, {}, {},
                          p.per_trajectory};
  });

  say(opts, "jz: " + std::to_string(p.n) + " trajectories, " +
                std::to_string(p.n_steps) + " steps, dim " + std::to_string(p.dim));
  EnsembleReport report = run_ensemble(ec);

  CommandResult result;
  json excluded = json::object();
  for (std::size_t j = 0; j < p.etas.size(); ++j) {
    const AgentMetrics& m = report.agents[j];
    ResultTable table({{"t"}, {"mean_rel_entropy", true}, {"se"}, {"entropy_rhs"},
                       {"mean_trace_dist"}, {"td_lower"}, {"td_upper"},
                       {"td_var_bound"}, {"re_var_bound"}});
    std::size_t n_excluded = 0;
    for (std::size_t k = 0; k < report.times.size(); ++k) {
      n_excluded += m.relative_entropy.excluded[k];
      table.add_row({report.times[k], m.relative_entropy.mean[k],
                     m.relative_entropy.std_error[k], m.entropy.mean[k],
                     m.trace_distance.mean[k], m.td_lower.mean[k], m.td_upper.mean[k],
                     m.td_variance_bound[k], m.re_variance_bound[k]});
    }
    std::string tag = eta_tag(p.etas[j]);
    excluded[tag] = n_excluded;
    write_table(result, opts, table, "jz_eta" + tag + ".csv");

    if (p.per_trajectory) {
      ResultTable samples({{"trajectory"}, {"t"}, {"rel_entropy", true}, {"trace_dist"}});
      for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t k = 0; k < report.times.size(); ++k) {
          samples.add_row({static_cast<double>(i), report.times[k],
                           m.relative_entropy.samples[i][k],
                           m.trace_distance.samples[i][k]});
        }
      }
      write_table(result, opts, samples, "jz_eta" + tag + "_samples.csv");
    }

    summarize_checks(result, opts, report, m.label, "entropy_identity",
                     "entropy identity, eta=" + tag);
    summarize_checks(result, opts, report, m.label, "trace_distance_lower",
                     "trace distance lower bound, eta=" + tag);
    summarize_checks(result, opts, report, m.label, "trace_distance_upper",
                     "trace distance upper bound, eta=" + tag);
  }

  // Less information should never mean a smaller average surprise.
  for (std::size_t a = 0; a < p.etas.size(); ++a) {
    for (std::size_t b = 0; b < p.etas.size(); ++b) {
      if (!(p.etas[a] < p.etas[b])) continue;
      const auto& lo = report.agents[a].relative_entropy;
      const auto& hi = report.agents[b].relative_entropy;
      std::size_t failed = 0;
      for (std::size_t k = 0; k < report.times.size(); ++k) {
        double tol = kMeanCheckSigmas * std::hypot(lo.std_error[k], hi.std_error[k]) + 1e-12;
        if (lo.mean[k] < hi.mean[k] - tol) ++failed;
      }
      record(result, opts,
             "entropy ordering eta=" + eta_tag(p.etas[a]) + " >= eta=" + eta_tag(p.etas[b]),
             failed == 0, std::to_string(failed) + " times out of order");
    }
  }

  json params = {{"dim", p.dim},         {"eta", p.etas},       {"tau_m", p.tau_m},
                 {"T", p.T},             {"dt", p.dt},          {"sample_stride", p.stride},
                 {"initial_std", p.std_dev}, {"n_trajectories", p.n}, {"seed", p.seed}};
  write_summary(result, opts, "jz", cfg, params, start,
                {{"excluded_infinite_rel_entropy", excluded}});
  return result;
}

CommandResult cmd_oscillator_curves(const ConfigSection& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  std::vector<double> grid;
  double h = 0.0;
  double tol = 0.0;
  validated([&] {
    grid = cfg.numbers("eta", {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5,
                               0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0});
    for (double e : grid) {
      if (!(e > 0.0 && e <= 1.0)) {
        throw OutOfRange("[oscillator-curves] eta " + fmt(e) + " outside (0, 1]");
      }
    }
    h = cfg.number("fd_step", 1e-5);
    tol = cfg.number("fd_tolerance", 1e-4);
    if (!(h > 0.0 && h < 0.01)) throw InvalidConfig("[oscillator-curves] fd_step must lie in (0, 0.01)");
    cfg.reject_unread();
    return 0;
  });

  CommandResult result;
  ResultTable table({{"eta"}, {"td_lower"}, {"td_upper"}, {"rel_entropy", true},
                     {"d_rel_entropy_d_eta", true}});
  std::vector<gaussian::TransitionRow> rows = gaussian::transition_curves(grid);
  double worst = 0.0;
  std::size_t compared = 0;
  auto entropy_at = [](double eta) {
    return gaussian::gaussian_entropy_from_purity(std::sqrt(eta));
  };
  for (const auto& row : rows) {
    double d = gaussian::entropy_eta_derivative(row.eta);
    table.add_row({row.eta, row.lower, row.upper, row.rel_entropy, d});
    if (row.eta - h > 0.0 && row.eta + h < 1.0) {
      double fd = (entropy_at(row.eta + h) - entropy_at(row.eta - h)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - d));
      ++compared;
    }
  }
  write_table(result, opts, table, "oscillator_curves.csv");
  record(result, opts, "derivative vs finite difference", worst <= tol,
         "max |diff| " + fmt(worst) + " over " + std::to_string(compared) + " points");
  write_summary(result, opts, "oscillator_curves", cfg,
                {{"eta", grid}, {"fd_step", h}, {"fd_tolerance", tol}}, start);
  return result;
}

CommandResult cmd_qubit_verify(const ConfigSection& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  struct Params {
    double tau_m, dt;
    std::vector<double> coherence_times;
    double coherence_tol, identity_T, identity_tol, short_fraction;
    std::uint64_t kraus_steps, seed;
    std::size_t n;
  };
  Params p = validated([&] {
    Params q;
    q.tau_m = cfg.number("tau_m", 1.0);
    if (!(q.tau_m > 0.0)) throw InvalidConfig("[qubit-verify] tau_m must be positive");
    q.dt = cfg.number("dt", 1e-3);
    q.coherence_times = cfg.numbers("coherence_times", {0.5, 1.0, 2.0});
    q.coherence_tol = cfg.number("coherence_tolerance", 1e-8);
    q.identity_T = cfg.number("identity_T", 2.0);
    q.identity_tol = cfg.number("identity_tolerance", 1e-6);
    q.short_fraction = cfg.number("short_time_fraction", 0.05);
    q.kraus_steps = cfg.count("kraus_steps", 100);
    q.n = trajectories(cfg, opts, 2000);
    q.seed = seed(cfg, opts);
    cfg.reject_unread();
    for (double t : q.coherence_times) steps_for(t, q.dt, "[qubit-verify] coherence_times");
    steps_for(q.identity_T, q.dt, "[qubit-verify] identity_T");
    if (!(q.short_fraction > 0.0 && q.short_fraction <= 1.0)) {
      throw InvalidConfig("[qubit-verify] short_time_fraction must lie in (0, 1]");
    }
    if (q.kraus_steps == 0) throw InvalidConfig("[qubit-verify] kraus_steps must be positive");
    // Stability guard for every simulation below.
    SimulationConfig probe(ObservableOperator(Matrix::Zero(2, 2)),
                           {MeasurementChannel(ObservableOperator(ops::pauli_z()), q.tau_m)},
                           q.dt, 1, q.seed);
    return q;
  });

  CommandResult result;
  const ObservableOperator h0(Matrix::Zero(2, 2));
  const MeasurementChannel z(ObservableOperator(ops::pauli_z()), p.tau_m);
  const DensityOperator plus = DensityOperator::pure(ops::plus_state());

  {
    std::vector<std::uint64_t> steps;
    for (double t : p.coherence_times) steps.push_back(steps_for(t, p.dt, "coherence"));
    std::uint64_t last = *std::max_element(steps.begin(), steps.end());
    SimulationConfig sim(h0, {z}, p.dt, last, p.seed);
    std::vector<std::uint64_t> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    auto path = unconditioned_path(sim, plus, sorted);
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      double t = static_cast<double>(sorted[i]) * p.dt;
      double exact = 0.5 * std::exp(-t / (2.0 * p.tau_m));
      worst = std::max(worst, std::abs(path[i].matrix()(0, 1) - Complex(exact, 0.0)));
    }
    record(result, opts, "coherence decay", worst <= p.coherence_tol,
           "max |rho01 - exp(-t/2tau)/2| = " + fmt(worst));
  }

  {
    std::vector<MeasurementChannel> channels{z};
    double rate = bounds::decoherence_rate(plus, channels);
    double T = p.short_fraction / rate;
    std::uint64_t n_steps = static_cast<std::uint64_t>(std::llround(T / p.dt));
    T = static_cast<double>(n_steps) * p.dt;
    bounds::BoundPair b = bounds::short_time_bounds(plus, channels, T);
    SimulationConfig sim(h0, channels, p.dt, n_steps, p.seed);
    EnsembleConfig ec{sim, plus, p.n, {AgentSpec::blind()}, {Metric::TraceDistance},
                      n_steps, Unraveling::Kraus, opts.threads, {}, {}, false};
    EnsembleReport report = run_ensemble(ec);
    double mean = report.agents[0].trace_distance.mean.back();
    bool ok = mean >= 0.8 * b.lower && mean <= 1.2 * b.upper;
    record(result, opts, "short-time bounds", ok,
           "<T> = " + fmt(mean) + " in [" + fmt(0.8 * b.lower) + ", " +
               fmt(1.2 * b.upper) + "]");
  }

  {
    std::uint64_t n_steps = steps_for(p.identity_T, p.dt, "identity");
    SimulationConfig sim(h0, {z}, p.dt, n_steps, p.seed);
    std::vector<std::uint64_t> all(n_steps + 1);
    for (std::uint64_t s = 0; s <= n_steps; ++s) all[s] = s;
    auto path = unconditioned_path(sim, plus, all);
    double lhs = bounds::commutator_rate_identity(path, sim.channels(), p.dt);
    double rhs = 1.0 - purity(path.back());
    record(result, opts, "commutator-rate identity",
           std::abs(lhs - rhs) <= p.identity_tol,
           "|lhs - (1 - P)| = " + fmt(std::abs(lhs - rhs)));
  }

  {
    // Mixed start: Euler-Maruyama's O(dt) purity bias stays below the
    // statistical resolution only away from the pure-state boundary.
    Vector psi(2);
    psi << std::cos(M_PI / 8.0), std::sin(M_PI / 8.0);
    Matrix m0 = 0.8 * DensityOperator::pure(psi).matrix() +
                0.2 * DensityOperator::maximally_mixed(2).matrix();
    DensityOperator rho0(m0);
    SimulationConfig sim(ObservableOperator(0.5 * ops::pauli_x()), {z}, p.dt,
                         p.kraus_steps, p.seed);
    auto run = [&](Unraveling u) {
      EnsembleConfig ec{sim, rho0, p.n, {AgentSpec::omniscient()}, {Metric::Purity},
                        p.kraus_steps, u, opts.threads, {}, {z.observable()}, false};
      return run_ensemble(ec);
    };
    EnsembleReport kraus = run(Unraveling::Kraus);
    EnsembleReport diffusive = run(Unraveling::Diffusive);
    auto compare = [&](const MetricSeries& a, const MetricSeries& b, const std::string& what) {
      double gap = std::abs(a.mean.back() - b.mean.back());
      double tol = kMeanCheckSigmas * std::hypot(a.std_error.back(), b.std_error.back());
      record(result, opts, "Kraus vs diffusive " + what, gap <= tol,
             "|diff| = " + fmt(gap) + ", 3 SE = " + fmt(tol));
    };
    compare(kraus.observables[0], diffusive.observables[0], "<sigma_z>");
    compare(kraus.agents[0].purity, diffusive.agents[0].purity, "purity");
  }

  json params = {{"tau_m", p.tau_m}, {"dt", p.dt}, {"coherence_times", p.coherence_times},
                 {"identity_T", p.identity_T}, {"short_time_fraction", p.short_fraction},
                 {"kraus_steps", p.kraus_steps}, {"n_trajectories", p.n}, {"seed", p.seed}};
  write_summary(result, opts, "qubit_verify", cfg, params, start);
  return result;
}

CommandResult cmd_multi_agent(const ConfigSection& cfg, const RunOptions& opts) {
  const auto start = Clock::now();
  struct Params {
    double tau_a, tau_b, T, dt;
    std::uint64_t n_steps, stride, seed;
    std::size_t n;
  };
  Params p = validated([&] {
    Params q;
    q.tau_a = cfg.number("tau_a", 1.0);
    q.tau_b = cfg.number("tau_b", 1.0);
    if (!(q.tau_a > 0.0 && q.tau_b > 0.0)) {
      throw InvalidConfig("[multi-agent] measurement times must be positive");
    }
    q.T = cfg.number("T", 2.0);
    q.dt = cfg.number("dt", 1e-3);
    q.n_steps = steps_for(q.T, q.dt, "[multi-agent]");
    q.stride = cfg.count("sample_stride", 200);
    if (q.stride == 0) throw InvalidConfig("[multi-agent] sample_stride must be positive");
    q.n = trajectories(cfg, opts, 2000);
    q.seed = seed(cfg, opts);
    cfg.reject_unread();
    return q;
  });

  EnsembleConfig ec = validated([&] {
    std::vector<MeasurementChannel> channels{
        MeasurementChannel(ObservableOperator(ops::pauli_z()), p.tau_a),
        MeasurementChannel(ObservableOperator(ops::pauli_x()), p.tau_b)};
    SimulationConfig sim(ObservableOperator(Matrix::Zero(2, 2)), channels, p.dt,
                         p.n_steps, p.seed);
    return EnsembleConfig{std::move(sim),
                          DensityOperator::pure(ops::basis_state(2, 0)),
                          p.n,
                          {AgentSpec::partial({1.0, 0.0}, "A"),
                           AgentSpec::partial({0.0, 1.0}, "B")},
                          {Metric::Bounds},
                          p.stride,
                          Unraveling::Kraus,
                          opts.threads,
                          {{0, 1}},
                          {},
                          false};
  });

  say(opts, "multi-agent: " + std::to_string(p.n) + " trajectories, " +
                std::to_string(p.n_steps) + " steps");
  EnsembleReport report = run_ensemble(ec);
  const PairMetrics& pair = report.pairs.front();

  CommandResult result;
  ResultTable table({{"t"}, {"mean_trace_dist"}, {"se"}, {"triangle_lower"},
                     {"triangle_upper"}, {"lower_ok"}, {"upper_ok"}});
  std::size_t k_lower = 0, k_upper = 0;
  std::vector<const BoundCheck*> lower, upper;
  for (const auto& c : report.bound_checks) {
    if (c.bound == "triangle_lower") lower.push_back(&c);
    if (c.bound == "triangle_upper") upper.push_back(&c);
  }
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    table.add_row({report.times[k], pair.trace_distance.mean[k],
                   pair.trace_distance.std_error[k], pair.lower.mean[k],
                   pair.upper.mean[k], lower[k]->satisfied ? 1.0 : 0.0,
                   upper[k]->satisfied ? 1.0 : 0.0});
    k_lower += lower[k]->satisfied ? 0 : 1;
    k_upper += upper[k]->satisfied ? 0 : 1;
  }
  write_table(result, opts, table, "multi_agent.csv");
  summarize_checks(result, opts, report, "A|B", "triangle_lower", "triangle lower bound");
  summarize_checks(result, opts, report, "A|B", "triangle_upper", "triangle upper bound");

  json params = {{"tau_a", p.tau_a}, {"tau_b", p.tau_b}, {"T", p.T}, {"dt", p.dt},
                 {"sample_stride", p.stride}, {"n_trajectories", p.n}, {"seed", p.seed}};
  write_summary(result, opts, "multi_agent", cfg, params, start,
                {{"lower_failures", k_lower}, {"upper_failures", k_upper}});
  return result;
}

}  // namespace qpercept
