#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pdmplab/ode.hpp"
#include "pdmplab/rate_matrix.hpp"
#include "pdmplab/rng.hpp"
#include "pdmplab/trajectory.hpp"

namespace pdmplab::ifa {

struct ResetMeasure {
  std::function<double(RngStream&)> sample;
  std::function<double(double)> cdf;  // optional, enables KS comparisons
};
ResetMeasure uniform_reset(double lo, double hi);
ResetMeasure point_reset(double value);

// Threshold-and-reset problem instance: the potential increases as
// x' = celerity(Y) * flow_factor(x) below the threshold c, the fast
// environment Y runs on its own clock scaled by epsilon, and each threshold
// hit resets the state from the measure attached to the environment state
// seen at the hit.
struct IFSpec {
  RateMatrix env = RateMatrix::single_state();
  std::vector<double> celerity;               // positive, bounded family
  std::function<double(double)> flow_factor;  // positive on (floor, threshold]
  double floor = 0.0;
  double threshold = 1.0;
  std::vector<ResetMeasure> reset;            // per environment state
  double epsilon = 1.0;
  std::function<double(RngStream&)> initial_law;
  int initial_env = 0;
  // When nonempty, the starting environment state is drawn from this law
  // instead of the fixed initial_env. With constant celerities the hit time
  // is independent of the environment, so a stationary start makes the
  // hit-state histogram match the stationary law at every epsilon.
  Eigen::VectorXd initial_env_law;
  StepControl step{1e-3, false, 1e-9};

  void validate() const;
  // Stationary law of the environment.
  Eigen::VectorXd stationary() const { return env.stationary_distribution(); }
};

// The piecewise-linear demonstration case: unit flow factor, celerities
// (1/2, 1), symmetric unit-rate switching on (0, 1), resets uniform on
// (0, 1/2), environment started in the slow state.
IFSpec default_instance(double epsilon);

struct IFEvent {
  double hit_time;
  int env_at_hit;
  double reset_value;
};

struct IFResult {
  Trajectory trajectory;
  std::vector<IFEvent> events;
};

// Simulates until the horizon or until n_hits threshold crossings, whichever
// comes first (n_hits = 0 disables the hit target). record_dt > 0 samples the
// trajectory on a grid in addition to the events.
IFResult simulate_if(const IFSpec& spec, double horizon, RngStream& rng,
                     std::size_t n_hits = 0, double record_dt = 0.0);

// Celerity-biased boundary law: pi(y) alpha(y), normalized.
Eigen::VectorXd pi_star(const Eigen::VectorXd& pi,
                        const std::vector<double>& alpha);

// Normalized counts of the environment state at each boundary hit.
std::vector<double> boundary_celerity_histogram(const std::vector<IFEvent>& events,
                                                int n_env);

// Mean celerity under the stationary environment law.
double averaged_celerity(const IFSpec& spec);

// Deterministic averaged motion x' = mean-celerity * flow_factor(x),
// integrated from x0 for duration t (valid before its own threshold hit).
double averaged_flow(const IFSpec& spec, double x0, double t);
// First threshold-hit time of the averaged motion.
double averaged_hit_time(const IFSpec& spec, double x0);

// Mixture of the reset measures weighted by pi_star.
struct AveragedJumpMeasure {
  Eigen::VectorXd weights;  // pi_star
  std::function<double(RngStream&)> sample;
  std::function<double(double)> cdf;  // present when all components carry CDFs
};
AveragedJumpMeasure averaged_jump_measure(const IFSpec& spec);

// The full small-epsilon limit description: mean celerity, boundary law and
// reset mixture.
struct AveragedSpec {
  double mean_celerity;          // stationary average of the celerities
  Eigen::VectorXd boundary_law;  // pi_star
  AveragedJumpMeasure mixture;
};
AveragedSpec averaged_spec(const IFSpec& spec);

// Advisory quadrature of 1 / flow_factor over [floor + delta, threshold -
// delta] for a shrinking delta ladder; flags an apparent divergence near the
// threshold (the model needs the integral finite there).
struct IntegrabilityReport {
  std::vector<double> delta;
  std::vector<double> integral;
  bool suspected_divergent;
};
IntegrabilityReport flow_integrability_advisory(const IFSpec& spec,
                                                int n_grid = 2048);

struct ConvergenceRow {
  double epsilon;
  std::size_t n_hits;
  double tv_pi_star;       // TV(first-hit celerity histogram, pi_star)
  double ks_mu_bar;        // KS statistic of resets vs the averaged measure
  double sup_dist_prehit;  // median pre-hit sup distance to the averaged flow
};

struct ConvergenceStudyOptions {
  std::size_t n_first_hits = 10000;  // replicas contributing one first hit each
  std::size_t n_prehit_replicas = 100;
  int n_grid_prehit = 64;
  std::size_t n_trend_batches = 8;
  std::uint64_t seed = 1;
  int n_threads = 0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  // One-sided permutation p-values for a decreasing trend along the schedule
  // (batched replicate statistics). Set when the schedule has >= 2 entries.
  double tv_trend_p = 1.0;
  double sup_trend_p = 1.0;
};

// Per epsilon: first-hit celerity TV against pi_star, KS of the first resets
// against the averaged measure, and the pre-hit sup distance to the averaged
// flow, plus monotone-trend verdicts along the schedule. Fresh replicas with
// fixed initial data expose the slow-environment bias at large epsilon.
ConvergenceStudy convergence_study(const IFSpec& base,
                                   const std::vector<double>& epsilon_schedule,
                                   const ConvergenceStudyOptions& opt = {});

// First-hit celerity counts and first-reset values over independent replicas.
struct FirstHitBatch {
  std::vector<int> env_at_hit;
  std::vector<double> reset_values;
};
FirstHitBatch first_hit_batch(const IFSpec& spec, std::size_t n_rep,
                              std::uint64_t seed, int n_threads = 0);

}  // namespace pdmplab::ifa
