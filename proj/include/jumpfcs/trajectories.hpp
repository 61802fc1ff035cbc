#pragma once

// Monte Carlo quantum-jump trajectories.
//
// Fixed-step scheme: the no-jump propagator U = exp(-i H_eff dt) is computed
// once. Each step draws r ~ U[0,1); with p = 1 - ||U psi||^2 a jump
// psi -> L psi / ||L psi|| happens when r < p and is recorded at the end of
// the step, otherwise psi -> U psi / ||U psi||. At most one jump per step.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "jumpfcs/liouville.hpp"
#include "jumpfcs/model.hpp"

namespace jumpfcs {

using QubitState = std::array<cplx, 2>;

/// Counter-based splitting: seed of trajectory `index` under `master_seed`.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Statistical mixture of pure states used to draw a trajectory's initial
/// state. A single-component mixture consumes no random numbers.
class InitialState {
 public:
  static InitialState ground();
  static InitialState excited();
  static InitialState pure(const QubitState& psi);
  /// Spectral decomposition of rho.
  static InitialState mixture(const DensityMatrix& rho);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<QubitState>& states() const { return states_; }
  DensityMatrix density_matrix() const;

 private:
  std::vector<double> weights_;
  std::vector<QubitState> states_;
};

struct TrajectoryRecord {
  std::vector<double> jump_times;
  QubitState final_state{};
  std::uint64_t seed = 0;
  double t = 0.0;
  double dt = 0.0;  // effective step, t / round(t / dt)
  /// States at the requested sample times (nearest step), if any.
  std::vector<QubitState> samples;
};

/// Largest dt accepted for a given unraveling: 0.05 / ||L^dagger L||_op.
double max_time_step(const Unraveling& u);

/// 1e-3 / max(gamma, |Omega|, |alpha|^2).
double default_time_step(const AtomParams& p);

TrajectoryRecord simulate_trajectory(const Unraveling& u, double t, double dt, std::uint64_t seed,
                                     const InitialState& init = InitialState::ground(),
                                     const std::vector<double>& sample_times = {});

struct CountHistogram {
  std::map<long long, long long> counts;
  long long n_traj = 0;
  double t = 0.0;

  void add(long long k, long long occurrences = 1);
  void merge(const CountHistogram& other);
  /// `K,count` rows in ascending K with a header line.
  void write_csv(std::ostream& out) const;
};

struct EnsembleResult {
  double k_hat = 0.0;
  std::optional<double> q_hat;  // undefined when every trajectory has K = 0
  double se_k = 0.0;
  std::optional<double> se_q;
  CountHistogram histogram;
};

struct EnsembleOptions {
  InitialState init = InitialState::ground();
  int bootstrap_resamples = 200;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Runs n_traj independent trajectories; seeds come from trajectory_seed so
/// results do not depend on the thread count. Standard errors by
/// nonparametric bootstrap over trajectories.
EnsembleResult ensemble_statistics(const Unraveling& u, double t, double dt, long long n_traj,
                                   std::uint64_t master_seed, const EnsembleOptions& options = {});

/// Mean of |psi><psi| over n_traj trajectories at each sample time.
std::vector<ComplexMatrix> ensemble_average_state(const Unraveling& u, double t, double dt,
                                                  long long n_traj, std::uint64_t master_seed,
                                                  const std::vector<double>& sample_times,
                                                  const EnsembleOptions& options = {});

struct BiasedStatistics {
  double k_s = 0.0;
  double q_s = 0.0;
  double effective_sample_size = 0.0;
  /// Self-normalized importance-sampling standard error of k_s.
  double se_k_s = 0.0;
};

/// Reweights the empirical count distribution by e^{-sK}. Throws
/// NumericalError when the effective sample size falls below 10.
BiasedStatistics biased_statistics(const CountHistogram& hist, double s);

}  // namespace jumpfcs
