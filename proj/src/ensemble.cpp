#include "qpercept/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "qpercept/bounds.hpp"

namespace qpercept {

namespace {

constexpr double kAbsoluteSlack = 1e-12;

// Per-trajectory values, one row per quantity, one column per sample time.
struct AgentRows {
  std::vector<double> td, re, purity, entropy, l2, lower, upper;
};

struct PairRows {
  std::vector<double> td, lower, upper;
};

struct TrajectoryRows {
  std::vector<AgentRows> agents;
  std::vector<PairRows> pairs;
  std::vector<std::vector<double>> observables;
};

bool wants(const EnsembleConfig& cfg, Metric m) { return cfg.metrics.count(m) > 0; }

TrajectoryRows evaluate(const EnsembleConfig& cfg, const TrajectoryRunner& runner,
                        std::size_t o_index, std::uint64_t trajectory) {
  const bool bounds = wants(cfg, Metric::Bounds);
  const bool need_td = bounds || wants(cfg, Metric::TraceDistance);
  const bool need_re = bounds || wants(cfg, Metric::RelativeEntropy);
  const bool need_purity = bounds || wants(cfg, Metric::Purity);
  const bool need_entropy = bounds || wants(cfg, Metric::Entropy);

  std::vector<TrajectoryFrame> frames = runner.run(trajectory);
  const std::size_t n_agents = runner.agents().size();
  TrajectoryRows rows;
  rows.agents.resize(n_agents);
  rows.pairs.resize(cfg.pairs.size());
  rows.observables.resize(cfg.observables.size());

  for (const auto& frame : frames) {
    const DensityOperator& o = frame.states[o_index].rho;
    for (std::size_t j = 0; j < n_agents; ++j) {
      const DensityOperator& rho = frame.states[j].rho;
      AgentRows& r = rows.agents[j];
      if (need_td) r.td.push_back(trace_distance(o, rho));
      if (need_re || need_entropy) {
        SpectralDecomposition spec = spectral_decomposition(rho.matrix());
        if (need_re) r.re.push_back(relative_entropy_pure(o, spec));
        EntropyMoments m = entropy_moments(spec);
        r.entropy.push_back(m.entropy);
        r.l2.push_back(m.surprise_second_moment);
      }
      if (need_purity) {
        bounds::BoundPair sandwich = bounds::purity_sandwich(rho);
        r.purity.push_back(purity(rho));
        r.lower.push_back(sandwich.lower);
        r.upper.push_back(sandwich.upper);
      }
    }
    for (std::size_t k = 0; k < cfg.pairs.size(); ++k) {
      const auto& a = frame.states[cfg.pairs[k].first].rho;
      const auto& b = frame.states[cfg.pairs[k].second].rho;
      bounds::BoundPair tri = bounds::multi_agent_triangle_bounds(a, b);
      rows.pairs[k].td.push_back(trace_distance(a, b));
      rows.pairs[k].lower.push_back(tri.lower);
      rows.pairs[k].upper.push_back(tri.upper);
    }
    for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
      rows.observables[k].push_back(o.expectation(cfg.observables[k]));
    }
  }
  return rows;
}

template <typename Get>
std::vector<std::vector<double>> gather(const std::vector<TrajectoryRows>& all,
                                        Get&& get) {
  std::vector<std::vector<double>> out;
  out.reserve(all.size());
  for (const auto& rows : all) out.push_back(get(rows));
  return out;
}

std::vector<std::vector<double>> difference(const std::vector<std::vector<double>>& a,
                                            const std::vector<std::vector<double>>& b) {
  std::vector<std::vector<double>> out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < out[i].size(); ++k) out[i][k] -= b[i][k];
  }
  return out;
}

void add_mean_checks(const MetricSeries& slack, const std::string& subject,
                     const std::string& name, std::vector<BoundCheck>& out) {
  for (std::size_t k = 0; k < slack.size(); ++k) {
    BoundCheck c;
    c.t = slack.times[k];
    c.subject = subject;
    c.bound = name;
    c.margin = slack.mean[k];
    c.tolerance = kMeanCheckSigmas * slack.std_error[k] + kAbsoluteSlack;
    c.satisfied = c.margin >= -c.tolerance;
    out.push_back(c);
  }
}

}  // namespace

MetricSeries aggregate(const std::vector<std::vector<double>>& per_trajectory,
                       std::vector<double> times) {
  if (per_trajectory.size() < 2) {
    throw InvalidConfig("aggregate needs at least two trajectories");
  }
  const std::size_t n_times = per_trajectory.front().size();
  for (const auto& row : per_trajectory) {
    if (row.size() != n_times) {
      throw MisalignedGrids("trajectories sampled on different time grids");
    }
  }
  if (!times.empty() && times.size() != n_times) {
    throw MisalignedGrids("time grid length differs from the samples");
  }

  MetricSeries s;
  s.times = std::move(times);
  for (std::size_t k = 0; k < n_times; ++k) {
    std::vector<double> x;
    x.reserve(per_trajectory.size());
    for (const auto& row : per_trajectory) {
      if (std::isfinite(row[k])) x.push_back(row[k]);
    }
    const std::size_t n = x.size();
    s.n_samples.push_back(n);
    s.excluded.push_back(per_trajectory.size() - n);
    if (n == 0) {
      // Everything excluded; report the common limit.
      s.mean.push_back(per_trajectory.front()[k]);
      s.variance.push_back(0.0);
      s.std_error.push_back(0.0);
      s.variance_std_error.push_back(0.0);
      continue;
    }
    bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    if (constant || n == 1) {
      s.mean.push_back(x[0]);
      s.variance.push_back(0.0);
      s.std_error.push_back(0.0);
      s.variance_std_error.push_back(0.0);
      continue;
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
      double d2 = (v - mean) * (v - mean);
      m2 += d2;
      m4 += d2 * d2;
    }
    const double nd = static_cast<double>(n);
    double var = m2 / (nd - 1.0);
    m4 /= nd;
    s.mean.push_back(mean);
    s.variance.push_back(var);
    s.std_error.push_back(std::sqrt(var / nd));
    double vv = n > 3 ? (m4 - var * var * (nd - 3.0) / (nd - 1.0)) / nd : m4 / nd;
    s.variance_std_error.push_back(std::sqrt(std::max(0.0, vv)));
  }
  return s;
}

bool EnsembleReport::all_satisfied() const {
  return std::all_of(bound_checks.begin(), bound_checks.end(),
                     [](const BoundCheck& c) { return c.satisfied; });
}

const AgentMetrics& EnsembleReport::agent(const std::string& label) const {
  for (const auto& a : agents) {
    if (a.label == label) return a;
  }
  throw std::out_of_range("no agent labelled '" + label + "' in report");
}

EnsembleReport run_ensemble(const EnsembleConfig& cfg) {
  if (cfg.n_trajectories < 2) {
    throw InvalidConfig("an ensemble needs at least two trajectories");
  }
  if (cfg.agents.empty()) throw InvalidConfig("no agents to evaluate");
  for (const auto& [a, b] : cfg.pairs) {
    if (a >= cfg.agents.size() || b >= cfg.agents.size()) {
      throw InvalidConfig("agent pair index out of range");
    }
  }
  for (const auto& x : cfg.observables) {
    if (x.dim() != cfg.sim.dim()) throw DimensionMismatch("observable dimension");
  }

  // O is appended unless an omniscient agent is already present.
  std::vector<AgentSpec> specs = cfg.agents;
  std::size_t o_index = specs.size();
  for (std::size_t j = 0; j < specs.size(); ++j) {
    if (specs[j].kind == AgentKind::Omniscient) {
      o_index = j;
      break;
    }
  }
  if (o_index == specs.size()) specs.push_back(AgentSpec::omniscient());

  const TrajectoryRunner runner(cfg.sim, cfg.initial, specs, cfg.unraveling,
                                cfg.sample_stride);

  std::vector<TrajectoryRows> all(cfg.n_trajectories);
  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : cfg.threads;
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, cfg.n_trajectories));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cfg.n_trajectories) return;
      try {
        all[i] = evaluate(cfg, runner, o_index, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cfg.n_trajectories);
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleReport report;
  report.n_trajectories = cfg.n_trajectories;
  for (std::uint64_t step : runner.sample_steps()) {
    report.times.push_back(static_cast<double>(step) * cfg.sim.dt());
  }
  const auto& times = report.times;
  auto series = [&](auto&& get) {
    MetricSeries s = aggregate(gather(all, get), times);
    if (cfg.keep_samples) s.samples = gather(all, get);
    return s;
  };

  for (std::size_t j = 0; j < specs.size(); ++j) {
    AgentMetrics m;
    m.label = specs[j].label();
    const AgentRows& first = all.front().agents[j];
    if (!first.td.empty()) m.trace_distance = series([&](const TrajectoryRows& r) { return r.agents[j].td; });
    if (!first.re.empty()) m.relative_entropy = series([&](const TrajectoryRows& r) { return r.agents[j].re; });
    if (!first.entropy.empty()) {
      m.entropy = series([&](const TrajectoryRows& r) { return r.agents[j].entropy; });
      m.surprise_second_moment = series([&](const TrajectoryRows& r) { return r.agents[j].l2; });
    }
    if (!first.purity.empty()) {
      m.purity = series([&](const TrajectoryRows& r) { return r.agents[j].purity; });
      m.td_lower = series([&](const TrajectoryRows& r) { return r.agents[j].lower; });
      m.td_upper = series([&](const TrajectoryRows& r) { return r.agents[j].upper; });
    }
    if (!first.purity.empty() && !first.entropy.empty()) {
      for (std::size_t k = 0; k < times.size(); ++k) {
        double p = m.purity.mean[k];
        double s = m.entropy.mean[k];
        m.td_variance_bound.push_back(p - p * p);
        m.re_variance_bound.push_back(m.surprise_second_moment.mean[k] - s * s);
      }
    }
    report.agents.push_back(std::move(m));
  }

  for (std::size_t k = 0; k < cfg.pairs.size(); ++k) {
    PairMetrics p;
    p.first = cfg.agents[cfg.pairs[k].first].label();
    p.second = cfg.agents[cfg.pairs[k].second].label();
    p.trace_distance = series([&](const TrajectoryRows& r) { return r.pairs[k].td; });
    p.lower = series([&](const TrajectoryRows& r) { return r.pairs[k].lower; });
    p.upper = series([&](const TrajectoryRows& r) { return r.pairs[k].upper; });
    report.pairs.push_back(std::move(p));
  }
  for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
    report.observables.push_back(
        series([&](const TrajectoryRows& r) { return r.observables[k]; }));
  }

  if (!wants(cfg, Metric::Bounds)) return report;

  for (std::size_t j = 0; j < cfg.agents.size(); ++j) {
    if (cfg.agents[j].kind == AgentKind::Omniscient) continue;
    const AgentMetrics& m = report.agents[j];
    auto td = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].td; });
    auto re = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].re; });
    auto ent = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].entropy; });
    auto lo = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].lower; });
    auto up = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].upper; });

    add_mean_checks(aggregate(difference(td, lo), times), m.label,
                    "trace_distance_lower", report.bound_checks);
    add_mean_checks(aggregate(difference(up, td), times), m.label,
                    "trace_distance_upper", report.bound_checks);

    MetricSeries gap = aggregate(difference(re, ent), times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      BoundCheck c;
      c.t = times[k];
      c.subject = m.label;
      c.bound = "entropy_identity";
      c.margin = -std::abs(gap.mean[k]);
      c.tolerance = kMeanCheckSigmas * gap.std_error[k] + kAbsoluteSlack;
      c.satisfied = c.margin >= -c.tolerance;
      report.bound_checks.push_back(c);
    }

    // Uncertainty of the bound itself enters by the delta method.
    auto l2 = gather(all, [&](const TrajectoryRows& r) { return r.agents[j].l2; });
    for (std::size_t k = 0; k < times.size(); ++k) {
      double p = m.purity.mean[k];
      double se_td_bound = std::abs(1.0 - 2.0 * p) * m.purity.std_error[k];
      BoundCheck c;
      c.t = times[k];
      c.subject = m.label;
      c.bound = "trace_distance_variance";
      c.margin = m.td_variance_bound[k] - m.trace_distance.variance[k];
      c.tolerance = kVarianceCheckSigmas *
                        std::hypot(m.trace_distance.variance_std_error[k], se_td_bound) +
                    kAbsoluteSlack;
      c.satisfied = c.margin >= -c.tolerance;
      report.bound_checks.push_back(c);

      double s_bar = m.entropy.mean[k];
      std::vector<std::vector<double>> z(all.size(), std::vector<double>(1));
      for (std::size_t i = 0; i < all.size(); ++i) {
        z[i][0] = l2[i][k] - 2.0 * s_bar * ent[i][k];
      }
      double se_re_bound = aggregate(z).std_error[0];
      c.bound = "relative_entropy_variance";
      c.margin = m.re_variance_bound[k] - m.relative_entropy.variance[k];
      c.tolerance = kVarianceCheckSigmas *
                        std::hypot(m.relative_entropy.variance_std_error[k], se_re_bound) +
                    kAbsoluteSlack;
      c.satisfied = c.margin >= -c.tolerance;
      report.bound_checks.push_back(c);
    }
  }

  for (std::size_t k = 0; k < cfg.pairs.size(); ++k) {
    auto td = gather(all, [&](const TrajectoryRows& r) { return r.pairs[k].td; });
    auto lo = gather(all, [&](const TrajectoryRows& r) { return r.pairs[k].lower; });
    auto up = gather(all, [&](const TrajectoryRows& r) { return r.pairs[k].upper; });
    std::string subject = report.pairs[k].first + "|" + report.pairs[k].second;
    add_mean_checks(aggregate(difference(td, lo), times), subject, "triangle_lower",
                    report.bound_checks);
    add_mean_checks(aggregate(difference(up, td), times), subject, "triangle_upper",
                    report.bound_checks);
  }
  return report;
}

}  // namespace qpercept
