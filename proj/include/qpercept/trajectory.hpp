#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpercept/sme.hpp"

namespace qpercept {

enum class AgentKind { Omniscient, Blind, Partial };

/// Who is describing the system and how much of each channel's record they
/// see. A partial agent carries one efficiency per channel (a single value is
/// broadcast to all channels).
struct AgentSpec {
  AgentKind kind = AgentKind::Omniscient;
  std::vector<double> efficiencies;
  std::string name;  // optional display label, overrides the default

  static AgentSpec omniscient();
  static AgentSpec blind();
  static AgentSpec partial(double eta);
  static AgentSpec partial(std::vector<double> per_channel, std::string name = {});

  /// "omniscient", "blind", "partial(0.5)" unless a name was given.
  std::string label() const;
  /// Fraction of channel `channel`'s record this agent conditions on.
  double efficiency(std::size_t channel) const;
};

struct AgentState {
  AgentSpec spec;
  DensityOperator rho;
};

/// All agents' states at one time of one realization.
struct TrajectoryFrame {
  std::uint64_t step = 0;
  double t = 0.0;
  std::vector<AgentState> states;  // in agent_specs order
  std::vector<double> dW;          // O's Wiener increments since the previous frame
  std::vector<double> records;     // readouts averaged since the previous frame

  const DensityOperator& state(const std::string& label) const;
};

enum class Unraveling { Kraus, Diffusive };

struct TrajectoryOptions {
  Unraveling unraveling = Unraveling::Kraus;
  std::uint64_t trajectory_index = 0;
  std::uint64_t sample_stride = 1;  // emit a frame every this many steps
};

/// Every channel's record cut into independent sub-records with the given
/// fractions of the measurement rate (sub-channel time τ_m / fraction). An
/// agent with efficiency η sees the leading sub-records summing to η.
struct ChannelSplit {
  std::vector<double> fractions;
};

/// One split per channel, nested so that every partial agent's efficiency is
/// a prefix sum. Throws InvalidEfficiency if the sub-channel dephasing rates
/// do not add back to the unsplit rate.
std::vector<ChannelSplit> split_channels(std::size_t n_channels,
                                         std::span<const AgentSpec> agents);

/// Runs realizations of the physical record and co-evolves every agent on it.
/// The blind agent's deterministic path is computed once per runner.
class TrajectoryRunner {
 public:
  TrajectoryRunner(SimulationConfig config, DensityOperator initial,
                   std::vector<AgentSpec> agents, Unraveling unraveling,
                   std::uint64_t sample_stride);

  std::vector<TrajectoryFrame> run(std::uint64_t trajectory_index) const;

  const SimulationConfig& config() const { return config_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  /// Steps at which frames are emitted (always includes 0 and n_steps).
  const std::vector<std::uint64_t>& sample_steps() const { return sample_steps_; }

 private:
  struct View {
    std::vector<std::size_t> pieces_seen;  // per channel
    std::vector<double> efficiency;        // per channel
    std::vector<Eigen::MatrixXd> unseen_dephasing;  // per channel, empty if all seen
  };

  std::vector<TrajectoryFrame> run_kraus(std::uint64_t index) const;
  std::vector<TrajectoryFrame> run_diffusive(std::uint64_t index) const;
  TrajectoryFrame make_frame(std::size_t sample, const std::vector<DensityOperator>& conditioned,
                             std::vector<double> dW, std::vector<double> records) const;

  SimulationConfig config_;
  DensityOperator initial_;
  std::vector<AgentSpec> agents_;
  Unraveling unraveling_;
  std::vector<std::uint64_t> sample_steps_;
  std::vector<ChannelSplit> splits_;
  std::vector<View> views_;                 // per agent (unused for blind)
  std::vector<DensityOperator> blind_path_;  // at sample steps
};

/// One realization from `initial`. States in each frame all refer to the same
/// physical record.
std::vector<TrajectoryFrame> run_trajectory(const SimulationConfig& config,
                                            const DensityOperator& initial,
                                            std::span<const AgentSpec> agents,
                                            const TrajectoryOptions& options = {});

/// Outcome-averaged evolution sampled at `sample_steps`.
std::vector<DensityOperator> unconditioned_path(
    const SimulationConfig& config, const DensityOperator& initial,
    std::span<const std::uint64_t> sample_steps);

}  // namespace qpercept
