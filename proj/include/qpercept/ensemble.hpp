#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qpercept/trajectory.hpp"

namespace qpercept {

/// Pointwise ensemble statistics of one metric on a common time grid.
/// Non-finite samples are left out of the statistics and counted.
struct MetricSeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;           // unbiased
  std::vector<double> std_error;          // √(variance / n)
  std::vector<double> variance_std_error;  // standard error of `variance`
  std::vector<std::size_t> n_samples;
  std::vector<std::size_t> excluded;
  /// Raw values, [trajectory][time], when the caller asked to keep them.
  std::vector<std::vector<double>> samples;

  std::size_t size() const { return mean.size(); }
};

/// Pointwise mean, unbiased variance and standard error over trajectories.
/// Every row must have one value per time (MisalignedGrids otherwise) and at
/// least two rows are required. `times` may be empty.
MetricSeries aggregate(const std::vector<std::vector<double>>& per_trajectory,
                       std::vector<double> times = {});

enum class Metric { TraceDistance, RelativeEntropy, Purity, Entropy, Bounds };

struct EnsembleConfig {
  SimulationConfig sim;
  DensityOperator initial;
  std::size_t n_trajectories = 2;
  std::vector<AgentSpec> agents;
  std::set<Metric> metrics{Metric::TraceDistance, Metric::RelativeEntropy,
                           Metric::Purity, Metric::Entropy, Metric::Bounds};
  std::uint64_t sample_stride = 1;
  Unraveling unraveling = Unraveling::Kraus;
  unsigned threads = 1;  // 0 picks the hardware concurrency
  /// Agent index pairs whose mutual trace distance is tracked.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  /// Observables whose expectation in ρ_O is averaged.
  std::vector<ObservableOperator> observables;
  bool keep_samples = false;
};

struct AgentMetrics {
  std::string label;
  MetricSeries trace_distance;    // T(ρ_O, ρ_agent)
  MetricSeries relative_entropy;  // S(ρ_O ‖ ρ_agent)
  MetricSeries purity;
  MetricSeries entropy;
  MetricSeries surprise_second_moment;  // tr ρ log² ρ
  MetricSeries td_lower;  // 1 - P
  MetricSeries td_upper;  // √(1 - P)
  /// Variance bounds on the ensemble, valid for stochastic agents too:
  /// P̄ - P̄² and ⟨tr ρ log² ρ⟩ - ⟨S⟩².
  std::vector<double> td_variance_bound;
  std::vector<double> re_variance_bound;
};

struct PairMetrics {
  std::string first;
  std::string second;
  MetricSeries trace_distance;
  MetricSeries lower;  // |P_1 - P_2|
  MetricSeries upper;  // √(1 - P_1) + √(1 - P_2)
};

/// margin is the signed slack of the inequality; satisfied when
/// margin ≥ -tolerance, the tolerance being a multiple of the standard error.
struct BoundCheck {
  double t = 0.0;
  std::string subject;
  std::string bound;
  bool satisfied = true;
  double margin = 0.0;
  double tolerance = 0.0;
};

struct EnsembleReport {
  std::vector<double> times;
  std::size_t n_trajectories = 0;
  std::vector<AgentMetrics> agents;
  std::vector<PairMetrics> pairs;
  std::vector<MetricSeries> observables;
  std::vector<BoundCheck> bound_checks;

  bool all_satisfied() const;
  const AgentMetrics& agent(const std::string& label) const;
};

/// Standard-error multiples used by the bound checks.
inline constexpr double kMeanCheckSigmas = 3.0;
inline constexpr double kVarianceCheckSigmas = 5.0;

/// Runs the realizations concurrently; the report depends only on the config.
EnsembleReport run_ensemble(const EnsembleConfig& cfg);

}  // namespace qpercept
