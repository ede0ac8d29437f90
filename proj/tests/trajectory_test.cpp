#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qpercept/operators.hpp"
#include "qpercept/trajectory.hpp"

using namespace qpercept;

namespace {

SimulationConfig driven_qubit(std::uint64_t n_steps, std::uint64_t seed = 5) {
  return SimulationConfig(ObservableOperator(0.5 * ops::pauli_x()),
                          {MeasurementChannel(ObservableOperator(ops::pauli_z()), 1.0)}, 1e-3,
                          n_steps, seed);
}

const DensityOperator kZero = DensityOperator::pure(ops::basis_state(2, 0));

}  // namespace

TEST(AgentSpec, LabelsAndEfficiencies) {
  EXPECT_EQ(AgentSpec::omniscient().label(), "omniscient");
  EXPECT_EQ(AgentSpec::blind().label(), "blind");
  EXPECT_EQ(AgentSpec::partial(0.5).label(), "partial(0.5)");
  EXPECT_EQ(AgentSpec::partial({1.0, 0.0}, "A").label(), "A");
  EXPECT_EQ(AgentSpec::partial(0.3).efficiency(4), 0.3);
  EXPECT_EQ(AgentSpec::blind().efficiency(0), 0.0);
  EXPECT_EQ(AgentSpec::omniscient().efficiency(0), 1.0);
}

TEST(SplitChannels, NestedPrefixSums) {
  std::vector<AgentSpec> agents{AgentSpec::partial(0.9), AgentSpec::partial(0.5),
                                AgentSpec::blind(), AgentSpec::partial(0.5)};
  auto splits = split_channels(1, agents);
  ASSERT_EQ(splits.size(), 1u);
  ASSERT_EQ(splits[0].fractions.size(), 3u);
  EXPECT_NEAR(splits[0].fractions[0], 0.5, 1e-15);
  EXPECT_NEAR(splits[0].fractions[1], 0.4, 1e-15);
  EXPECT_NEAR(splits[0].fractions[2], 0.1, 1e-15);

  std::vector<AgentSpec> two{AgentSpec::partial({1.0, 0.0}), AgentSpec::partial({0.0, 1.0})};
  auto per_channel = split_channels(2, two);
  EXPECT_EQ(per_channel[0].fractions, std::vector<double>{1.0});
  EXPECT_EQ(per_channel[1].fractions, std::vector<double>{1.0});

  std::vector<AgentSpec> bad{AgentSpec::partial(1.2)};
  EXPECT_THROW(split_channels(1, bad), InvalidEfficiency);
}

TEST(Trajectory, FirstFrameIsTheInitialStateForEveryone) {
  std::vector<AgentSpec> agents{AgentSpec::omniscient(), AgentSpec::blind(),
                                AgentSpec::partial(0.5)};
  auto frames = run_trajectory(driven_qubit(100), kZero, agents, {Unraveling::Kraus, 0, 10});
  ASSERT_EQ(frames.size(), 11u);
  EXPECT_EQ(frames[0].t, 0.0);
  for (const auto& s : frames[0].states) EXPECT_EQ(s.rho.matrix(), kZero.matrix());
  EXPECT_NEAR(frames.back().t, 0.1, 1e-15);
}

TEST(Trajectory, BlindAgentFollowsTheMasterEquation) {
  SimulationConfig cfg = driven_qubit(500);
  std::vector<AgentSpec> agents{AgentSpec::omniscient(), AgentSpec::blind()};
  std::vector<std::uint64_t> steps;
  for (std::uint64_t s = 0; s <= 500; s += 50) steps.push_back(s);
  auto path = unconditioned_path(cfg, kZero, steps);
  for (auto unraveling : {Unraveling::Kraus, Unraveling::Diffusive}) {
    for (std::uint64_t traj : {0u, 7u}) {
      auto frames = run_trajectory(cfg, kZero, agents, {unraveling, traj, 50});
      ASSERT_EQ(frames.size(), path.size());
      for (std::size_t i = 0; i < frames.size(); ++i) {
        EXPECT_EQ(frames[i].state("blind").matrix(), path[i].matrix());
      }
    }
  }
}

TEST(Trajectory, OmniscientStaysPureAndFullEfficiencyMatchesIt) {
  std::vector<AgentSpec> agents{AgentSpec::omniscient(), AgentSpec::partial(1.0)};
  auto frames = run_trajectory(driven_qubit(2000), kZero, agents, {Unraveling::Kraus, 3, 100});
  for (const auto& f : frames) {
    EXPECT_GE(purity(f.state("omniscient")), 1.0 - 1e-10);
    EXPECT_LE(trace_distance(f.state("omniscient"), f.state("partial(1)")), 1e-12);
  }
}

TEST(Trajectory, DeterministicPerIndex) {
  std::vector<AgentSpec> agents{AgentSpec::omniscient(), AgentSpec::partial(0.4)};
  SimulationConfig cfg = driven_qubit(300);
  auto a = run_trajectory(cfg, kZero, agents, {Unraveling::Kraus, 11, 30});
  auto b = run_trajectory(cfg, kZero, agents, {Unraveling::Kraus, 11, 30});
  auto c = run_trajectory(cfg, kZero, agents, {Unraveling::Kraus, 12, 30});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < agents.size(); ++j) {
      EXPECT_EQ(a[i].states[j].rho.matrix(), b[i].states[j].rho.matrix());
    }
    EXPECT_EQ(a[i].dW, b[i].dW);
  }
  EXPECT_GT(trace_distance(a.back().states[0].rho, c.back().states[0].rho), 1e-6);
}

// Conditioning on more of the record refines the description, so the average
// over realizations of any agent's state is the blind state.
TEST(Trajectory, AgentStatesAverageToTheBlindState) {
  const int n = 2000;
  SimulationConfig cfg = driven_qubit(1000);
  std::vector<AgentSpec> agents{AgentSpec::omniscient(), AgentSpec::partial(0.5),
                                AgentSpec::blind()};
  TrajectoryRunner runner(cfg, kZero, agents, Unraveling::Kraus, 1000);
  Matrix sum_o = Matrix::Zero(2, 2), sum_b = Matrix::Zero(2, 2);
  Matrix blind;
  double p_o = 0, p_b = 0, p_blind = 0;
  for (int i = 0; i < n; ++i) {
    auto frames = runner.run(static_cast<std::uint64_t>(i));
    const auto& last = frames.back();
    sum_o += last.states[0].rho.matrix();
    sum_b += last.states[1].rho.matrix();
    blind = last.states[2].rho.matrix();
    p_o += purity(last.states[0].rho);
    p_b += purity(last.states[1].rho);
    p_blind = purity(last.states[2].rho);
  }
  double tol = 4.0 / std::sqrt(static_cast<double>(n));
  EXPECT_LE((sum_o / n - blind).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((sum_b / n - blind).cwiseAbs().maxCoeff(), tol);
  EXPECT_GT(p_o / n, p_b / n);
  EXPECT_GT(p_b / n, p_blind);
}

TEST(Trajectory, DiffusiveNoiseIsWiener) {
  SimulationConfig cfg = driven_qubit(2000);
  std::vector<AgentSpec> agents{AgentSpec::omniscient()};
  auto frames = run_trajectory(cfg, kZero, agents, {Unraveling::Diffusive, 2, 1});
  double s1 = 0, s2 = 0;
  int n = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    double dW = frames[i].dW.at(0);
    s1 += dW;
    s2 += dW * dW;
    ++n;
  }
  double dt = cfg.dt();
  EXPECT_NEAR(s1 / n, 0.0, 5.0 * std::sqrt(dt / n));
  EXPECT_NEAR(s2 / n, dt, 5.0 * dt * std::sqrt(2.0 / n));
  for (const auto& f : frames) EXPECT_NEAR(f.states[0].rho.matrix().trace().real(), 1.0, 1e-12);
}

TEST(Trajectory, UnknownLabelThrows) {
  std::vector<AgentSpec> agents{AgentSpec::omniscient()};
  auto frames = run_trajectory(driven_qubit(10), kZero, agents, {Unraveling::Kraus, 0, 10});
  EXPECT_ANY_THROW(frames[0].state("nobody"));
}
