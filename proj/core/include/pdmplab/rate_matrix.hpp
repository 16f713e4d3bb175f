#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pdmplab/rng.hpp"

namespace pdmplab {

// Conservative generator of a finite-state Markov jump process: off-diagonal
// entries are nonnegative transition rates, each diagonal entry is minus its
// row's off-diagonal sum.
class RateMatrix {
 public:
  explicit RateMatrix(Eigen::MatrixXd q);

  // Builds the generator from off-diagonal rates (diagonal recomputed).
  static RateMatrix from_rates(const Eigen::MatrixXd& rates);
  static RateMatrix two_state(double rate01, double rate10);
  static RateMatrix symmetric_two_state(double rate);
  static RateMatrix cycle(int n_states, double rate);
  static RateMatrix single_state();

  int size() const { return static_cast<int>(q_.rows()); }
  const Eigen::MatrixXd& q() const { return q_; }
  double rate(int from, int to) const { return q_(from, to); }
  double exit_rate(int state) const { return -q_(state, state); }
  bool irreducible() const { return irreducible_; }

  // Unique invariant probability vector; throws for reducible generators,
  // naming the states unreachable in the transition graph. Residual of the
  // balance equations is at most 1e-10.
  Eigen::VectorXd stationary_distribution() const;

 private:
  void validate_and_classify();

  Eigen::MatrixXd q_;
  bool irreducible_ = false;
};

struct CtmcSegment {
  double t_begin;
  double t_end;
  int state;
};
using CtmcPath = std::vector<CtmcSegment>;

// Exact jump-chain simulation: exponential holding times, next state drawn
// proportionally to the off-diagonal row. Absorbing states hold to the
// horizon.
CtmcPath simulate_ctmc(const RateMatrix& q, int y0, double horizon,
                       RngStream& rng);

// Jump-by-jump generation for horizons too long to store.
class CtmcStream {
 public:
  CtmcStream(const RateMatrix& q, int y0, RngStream& rng);

  int state() const { return state_; }
  // Holding time in the current state; advances to the next state. Returns
  // +infinity (state unchanged) if the current state is absorbing.
  double advance();

 private:
  const RateMatrix* q_;
  RngStream* rng_;
  int state_;
  std::vector<double> row_;  // scratch for the jump-chain draw
};

// Fraction of [0, horizon] spent in `state`.
double occupation_fraction(const CtmcPath& path, int state);

// Exact value of the path integral of a state-indexed value a over the path.
double integrate_along(const CtmcPath& path, const std::vector<double>& a);

}  // namespace pdmplab
