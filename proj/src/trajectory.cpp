#include "qpercept/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qpercept {

namespace {

constexpr double kLevelTolerance = 1e-12;

std::string format_efficiency(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eta);
  return buf;
}

}  // namespace

AgentSpec AgentSpec::omniscient() { return {AgentKind::Omniscient, {}, {}}; }

AgentSpec AgentSpec::blind() { return {AgentKind::Blind, {}, {}}; }

AgentSpec AgentSpec::partial(double eta) {
  return {AgentKind::Partial, {eta}, {}};
}

AgentSpec AgentSpec::partial(std::vector<double> per_channel,
                             std::string name) {
  return {AgentKind::Partial, std::move(per_channel), std::move(name)};
}

std::string AgentSpec::label() const {
  if (!name.empty()) return name;
  switch (kind) {
    case AgentKind::Omniscient:
      return "omniscient";
    case AgentKind::Blind:
      return "blind";
    case AgentKind::Partial:
      break;
  }
  std::string out = "partial(";
  for (std::size_t i = 0; i < efficiencies.size(); ++i) {
    if (i) out += ",";
    out += format_efficiency(efficiencies[i]);
  }
  return out + ")";
}

double AgentSpec::efficiency(std::size_t channel) const {
  switch (kind) {
    case AgentKind::Omniscient:
      return 1.0;
    case AgentKind::Blind:
      return 0.0;
    case AgentKind::Partial:
      break;
  }
  if (efficiencies.empty()) throw InvalidEfficiency("partial agent without efficiency");
  return efficiencies.size() == 1 ? efficiencies.front() : efficiencies.at(channel);
}

const DensityOperator& TrajectoryFrame::state(const std::string& label) const {
  for (const auto& s : states) {
    if (s.spec.label() == label) return s.rho;
  }
  throw std::out_of_range("no agent labelled '" + label + "' in frame");
}

std::vector<ChannelSplit> split_channels(std::size_t n_channels,
                                         std::span<const AgentSpec> agents) {
  std::vector<ChannelSplit> splits(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    std::vector<double> levels{1.0};
    for (const auto& agent : agents) {
      if (agent.kind != AgentKind::Partial) continue;
      double e = agent.efficiency(c);
      if (!(e >= 0.0 && e <= 1.0)) {
        throw InvalidEfficiency("efficiency " + format_efficiency(e) +
                                " outside [0, 1]");
      }
      if (e > kLevelTolerance && e < 1.0 - kLevelTolerance) levels.push_back(e);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](double a, double b) {
                               return std::abs(a - b) <= kLevelTolerance;
                             }),
                 levels.end());
    if (levels.size() > kMaxPiecesPerChannel) {
      throw InvalidEfficiency("too many distinct efficiencies on one channel");
    }
    double previous = 0.0;
    double total = 0.0;
    for (double level : levels) {
      splits[c].fractions.push_back(level - previous);
      total += level - previous;
      previous = level;
    }
    // Sub-channel rates f/(8τ) must add back to the unsplit 1/(8τ).
    if (std::abs(total - 1.0) > 1e-14) {
      throw InvalidEfficiency("sub-channel dephasing rates do not sum to the channel rate");
    }
  }
  return splits;
}

std::vector<DensityOperator> unconditioned_path(
    const SimulationConfig& config, const DensityOperator& initial,
    std::span<const std::uint64_t> sample_steps) {
  std::vector<DensityOperator> out;
  out.reserve(sample_steps.size());
  DensityOperator rho = initial;
  std::uint64_t step = 0;
  for (std::uint64_t target : sample_steps) {
    for (; step < target; ++step) rho = step_unconditioned(rho, config);
    out.push_back(rho);
  }
  return out;
}

TrajectoryRunner::TrajectoryRunner(SimulationConfig config,
                                   DensityOperator initial,
                                   std::vector<AgentSpec> agents,
                                   Unraveling unraveling,
                                   std::uint64_t sample_stride)
    : config_(std::move(config)),
      initial_(std::move(initial)),
      agents_(std::move(agents)),
      unraveling_(unraveling) {
  if (initial_.dim() != config_.dim()) {
    throw DimensionMismatch("initial state dimension differs from the Hamiltonian's");
  }
  if (sample_stride == 0) throw InvalidConfig("sample stride must be positive");
  const std::size_t n_channels = config_.channels().size();
  for (const auto& agent : agents_) {
    if (agent.kind == AgentKind::Partial && agent.efficiencies.size() != 1 &&
        agent.efficiencies.size() != n_channels) {
      throw InvalidEfficiency("agent " + agent.label() +
                              " needs one efficiency or one per channel");
    }
  }

  for (std::uint64_t s = 0; s < config_.n_steps(); s += sample_stride) {
    sample_steps_.push_back(s);
  }
  sample_steps_.push_back(config_.n_steps());

  splits_ = split_channels(n_channels, agents_);
  views_.resize(agents_.size());
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      double e = agents_[j].efficiency(c);
      std::size_t seen = 0;
      double cumulative = 0.0;
      for (double f : splits_[c].fractions) {
        if (cumulative + f > e + kLevelTolerance) break;
        cumulative += f;
        ++seen;
      }
      views_[j].pieces_seen.push_back(seen);
      views_[j].efficiency.push_back(e);
      const auto& ch = config_.channels()[c];
      double unseen = 1.0 - e;
      views_[j].unseen_dephasing.push_back(
          unseen > kLevelTolerance
              ? kraus::dephasing_factors(ch.eigenvalues(), ch.tau_m() / unseen,
                                         config_.dt())
              : Eigen::MatrixXd());
    }
  }

  bool any_blind = std::any_of(agents_.begin(), agents_.end(), [](const auto& a) {
    return a.kind == AgentKind::Blind;
  });
  if (any_blind) blind_path_ = unconditioned_path(config_, initial_, sample_steps_);
}

TrajectoryFrame TrajectoryRunner::make_frame(
    std::size_t sample, const std::vector<DensityOperator>& conditioned,
    std::vector<double> dW, std::vector<double> records) const {
  TrajectoryFrame frame;
  frame.step = sample_steps_[sample];
  frame.t = static_cast<double>(frame.step) * config_.dt();
  frame.states.reserve(agents_.size());
  for (std::size_t j = 0; j < agents_.size(); ++j) {
    const auto& spec = agents_[j];
    if (spec.kind == AgentKind::Blind) {
      frame.states.push_back({spec, blind_path_[sample]});
    } else {
      frame.states.push_back({spec, conditioned[j]});
    }
  }
  frame.dW = std::move(dW);
  frame.records = std::move(records);
  return frame;
}

std::vector<TrajectoryFrame> TrajectoryRunner::run(std::uint64_t index) const {
  return unraveling_ == Unraveling::Kraus ? run_kraus(index) : run_diffusive(index);
}

// conditioned[j] holds agent j's state; slot agents_.size() holds O. Between
// frames the states live as plain matrices: every update is a completely
// positive map followed by trace renormalization.
std::vector<TrajectoryFrame> TrajectoryRunner::run_kraus(std::uint64_t index) const {
  const NoiseSource noise(config_.seed(), index);
  const auto& channels = config_.channels();
  const std::size_t n_channels = channels.size();
  const std::size_t n_agents = agents_.size();
  const double dt = config_.dt();

  std::vector<DensityOperator> states(n_agents + 1, initial_);
  std::vector<TrajectoryFrame> frames;
  frames.reserve(sample_steps_.size());
  frames.push_back(make_frame(0, states, std::vector<double>(n_channels, 0.0),
                              std::vector<double>(n_channels, 0.0)));

  std::vector<std::size_t> partial;
  for (std::size_t j = 0; j < n_agents; ++j) {
    if (agents_[j].kind == AgentKind::Partial) partial.push_back(j);
  }
  Matrix om = initial_.matrix();
  std::vector<Matrix> am(n_agents);
  for (std::size_t j : partial) am[j] = initial_.matrix();

  std::vector<double> dW_acc(n_channels, 0.0), record_acc(n_channels, 0.0);
  std::vector<double> readouts;
  Matrix scratch;
  std::size_t next_sample = 1;
  std::uint64_t interval_start = 0;
  for (std::uint64_t step = 0; step < config_.n_steps(); ++step) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      const auto& ch = channels[c];
      const RealVector& a = ch.eigenvalues();
      const auto& fractions = splits_[c].fractions;
      const bool diagonal = ch.diagonal();

      Matrix& local = diagonal ? om : (scratch = ch.to_eigenbasis(om));
      double mean_o = (local.diagonal().real().array() * a.array()).sum();
      readouts.assign(fractions.size(), 0.0);
      double combined = 0.0;
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        double tau = ch.tau_m() / fractions[i];
        readouts[i] = kraus::sample_readout(local, a, tau, dt,
                                            noise.draw(step, noise_slot(c, i)));
        kraus::condition(local, a, tau, dt, readouts[i]);
        combined += fractions[i] * readouts[i];
      }
      if (!diagonal) om = ch.from_eigenbasis(local);
      dW_acc[c] += (combined - mean_o) * dt / std::sqrt(ch.tau_m());
      record_acc[c] += combined;

      for (std::size_t j : partial) {
        const View& view = views_[j];
        Matrix& mine = diagonal ? am[j] : (scratch = ch.to_eigenbasis(am[j]));
        for (std::size_t i = 0; i < view.pieces_seen[c]; ++i) {
          kraus::condition(mine, a, ch.tau_m() / fractions[i], dt, readouts[i]);
        }
        if (view.unseen_dephasing[c].size() > 0) {
          kraus::dephase(mine, view.unseen_dephasing[c]);
        }
        if (!diagonal) am[j] = ch.from_eigenbasis(mine);
      }
    }
    if (config_.has_hamiltonian()) {
      const Matrix& u = config_.unitary_step();
      om = u * om * u.adjoint();
      for (std::size_t j : partial) am[j] = u * am[j] * u.adjoint();
    }

    if (step + 1 == sample_steps_[next_sample]) {
      states[n_agents] = DensityOperator::from_positive_map(om);
      om = states[n_agents].matrix();
      for (std::size_t j = 0; j < n_agents; ++j) {
        if (agents_[j].kind == AgentKind::Omniscient) states[j] = states[n_agents];
      }
      for (std::size_t j : partial) {
        states[j] = DensityOperator::from_positive_map(am[j]);
        am[j] = states[j].matrix();
      }
      double span = static_cast<double>(step + 1 - interval_start);
      for (double& r : record_acc) r /= span;
      frames.push_back(make_frame(next_sample, states, dW_acc, record_acc));
      std::fill(dW_acc.begin(), dW_acc.end(), 0.0);
      std::fill(record_acc.begin(), record_acc.end(), 0.0);
      interval_start = step + 1;
      ++next_sample;
    }
  }
  return frames;
}

std::vector<TrajectoryFrame> TrajectoryRunner::run_diffusive(
    std::uint64_t index) const {
  const NoiseSource noise(config_.seed(), index);
  const auto& channels = config_.channels();
  const std::size_t n_channels = channels.size();
  const std::size_t n_agents = agents_.size();
  const double dt = config_.dt();
  const double sqrt_dt = std::sqrt(dt);

  std::vector<DensityOperator> states(n_agents + 1, initial_);
  auto publish = [&](std::vector<DensityOperator>& s) {
    for (std::size_t j = 0; j < n_agents; ++j) {
      if (agents_[j].kind == AgentKind::Omniscient) s[j] = s[n_agents];
    }
  };

  std::vector<TrajectoryFrame> frames;
  frames.reserve(sample_steps_.size());
  frames.push_back(make_frame(0, states, std::vector<double>(n_channels, 0.0),
                              std::vector<double>(n_channels, 0.0)));

  std::vector<double> dW_acc(n_channels, 0.0), record_acc(n_channels, 0.0);
  std::vector<std::vector<double>> piece_noise(n_channels);
  std::vector<double> xi_o(n_channels), xi(n_channels);
  std::size_t next_sample = 1;
  std::uint64_t interval_start = 0;
  for (std::uint64_t step = 0; step < config_.n_steps(); ++step) {
    const DensityOperator& o = states[n_agents];
    std::vector<double> mean_o(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) {
      const auto& fractions = splits_[c].fractions;
      piece_noise[c].resize(fractions.size());
      xi_o[c] = 0.0;
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        piece_noise[c][i] = sqrt_dt * noise.draw(step, noise_slot(c, i)).normal;
        xi_o[c] += std::sqrt(fractions[i]) * piece_noise[c][i];
      }
      mean_o[c] = o.expectation(channels[c].observable());
    }

    std::vector<DensityOperator> next = states;
    for (std::size_t j = 0; j < n_agents; ++j) {
      if (agents_[j].kind != AgentKind::Partial) continue;
      const View& view = views_[j];
      for (std::size_t c = 0; c < n_channels; ++c) {
        const auto& ch = channels[c];
        const auto& fractions = splits_[c].fractions;
        double seen_noise = 0.0;
        for (std::size_t i = 0; i < view.pieces_seen[c]; ++i) {
          seen_noise += std::sqrt(fractions[i]) * piece_noise[c][i];
        }
        double gap = states[j].expectation(ch.observable()) - mean_o[c];
        xi[c] = seen_noise - gap * view.efficiency[c] * dt / std::sqrt(ch.tau_m());
      }
      next[j] = step_conditioned_diffusive(states[j], config_, xi);
    }
    next[n_agents] = step_conditioned_diffusive(o, config_, xi_o);
    for (std::size_t c = 0; c < n_channels; ++c) {
      dW_acc[c] += xi_o[c];
      record_acc[c] += mean_o[c] + std::sqrt(channels[c].tau_m()) * xi_o[c] / dt;
    }
    states = std::move(next);

    if (step + 1 == sample_steps_[next_sample]) {
      publish(states);
      double span = static_cast<double>(step + 1 - interval_start);
      for (double& r : record_acc) r /= span;
      frames.push_back(make_frame(next_sample, states, dW_acc, record_acc));
      std::fill(dW_acc.begin(), dW_acc.end(), 0.0);
      std::fill(record_acc.begin(), record_acc.end(), 0.0);
      interval_start = step + 1;
      ++next_sample;
    }
  }
  return frames;
}

std::vector<TrajectoryFrame> run_trajectory(const SimulationConfig& config,
                                            const DensityOperator& initial,
                                            std::span<const AgentSpec> agents,
                                            const TrajectoryOptions& options) {
  TrajectoryRunner runner(config, initial,
                          std::vector<AgentSpec>(agents.begin(), agents.end()),
                          options.unraveling, options.sample_stride);
  return runner.run(options.trajectory_index);
}

}  // namespace qpercept
