#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pdmplab/pdmp.hpp"
#include "pdmplab/rate_matrix.hpp"
#include "pdmplab/rng.hpp"
#include "pdmplab/stats.hpp"

namespace pdmplab::switched {

// ---------------------------------------------------------------------------
// Scalar growth in a fluctuating environment
// ---------------------------------------------------------------------------

struct MalthusModel {
  RateMatrix env;
  std::vector<double> growth;  // per-environment growth rate
  double x0 = 1.0;

  MalthusModel(RateMatrix env_, std::vector<double> growth_, double x0_);
  SwitchedSystem to_system() const;
};

// Perron root of q + p diag(a) with its left eigenvector (normalized to sum
// one). The Perron properties (real, simple, positive eigenvector) are
// checked a posteriori rather than assumed.
struct PerronMoment {
  double lambda;
  Eigen::VectorXd left_eigvec;
};
PerronMoment moment_growth_rate(const RateMatrix& q, const std::vector<double>& a,
                                double p);

// nu(a): stationary average of the growth rates.
double stationary_average(const RateMatrix& q, const std::vector<double>& a);

// mu0^T exp(t (q + p diag(a))) 1 : the p-th moment ratio E[X_t^p]/E[X_0^p].
double moment_feynman_kac(const RateMatrix& q, const std::vector<double>& a,
                          double p, double t, const Eigen::VectorXd& mu0);

// Monte-Carlo counterpart of moment_feynman_kac: E[exp(p * int a)] over
// environment paths, with its standard error.
stats::Summary feynman_kac_mc(const RateMatrix& q, const std::vector<double>& a,
                              double p, double t, const Eigen::VectorXd& mu0,
                              std::size_t n_paths, std::uint64_t seed,
                              int n_threads = 0);

struct DichotomyReport {
  enum class Regime { MomentsDiverge, MomentsDecay, Critical };
  double nu_a;
  Regime regime;
  double p_star;      // a moment order with negative growth (decay regime)
  double window_hi;   // upper end of the decaying-moment window
  bool window_open;   // true if the window extends past the searched range
};
DichotomyReport moment_dichotomy(const RateMatrix& q, const std::vector<double>& a,
                                 double p_max = 8.0, double critical_tol = 1e-9);

// |finite-difference d(lambda_p)/dp at 0 - nu(a)|, central difference h=1e-5.
double derivative_check(const RateMatrix& q, const std::vector<double>& a);

struct GrowthRateCurve {
  std::vector<double> p;
  std::vector<double> lambda;
  double derivative_at_zero;
};
GrowthRateCurve growth_rate_curve(const RateMatrix& q, const std::vector<double>& a,
                                  const std::vector<double>& p_grid);

// ---------------------------------------------------------------------------
// Planar switched flows and Lyapunov exponents
// ---------------------------------------------------------------------------

// A finite family of linear flows x' = M_i x under Markov switching.
struct LinearSwitchedSystem {
  std::vector<Eigen::MatrixXd> mats;
  RateMatrix env;

  LinearSwitchedSystem(std::vector<Eigen::MatrixXd> mats_, RateMatrix env_);
  SwitchedSystem to_system() const;
  int dimension() const { return static_cast<int>(mats.front().rows()); }
};

Eigen::Matrix2d planar_matrix_0();
Eigen::Matrix2d planar_matrix_1();
// The two spiral-in flows switched at the given rate.
LinearSwitchedSystem canonical_planar(double switch_rate);

// Analytic solution of x' = planar_matrix_1() x.
Eigen::Vector2d planar_closed_form(double x0, double y0, double t);

struct LyapunovOptions {
  double renorm_dt = 1.0;   // renormalize |x| to 1 this often
  StepControl step;
  int n_threads = 0;
  double ci_width_request = 0.0;  // 0: no width check
};

struct LyapunovEstimate {
  double chi;
  double se;
  double ci_lo, ci_hi;
  double horizon;
  int n_rep;
  bool horizon_warning;  // CI wider than requested
  bool ci_excludes_zero() const { return ci_lo > 0.0 || ci_hi < 0.0; }
};

// Estimates lim (1/t) log|X_t| by accumulating log norms with periodic
// renormalization; the confidence interval comes from the replica spread.
LyapunovEstimate lyapunov_exponent(const LinearSwitchedSystem& sys,
                                   double horizon, std::uint64_t seed, int n_rep,
                                   const LyapunovOptions& opt = {});

struct CriticalRateOptions {
  double base_horizon = 200.0;
  double horizon_cap = 1e4;
  int n_rep = 32;
  std::uint64_t seed = 42;
  LyapunovOptions lyapunov;
};

struct CriticalRateResult {
  double lo, hi;
  LyapunovEstimate chi_at_lo, chi_at_hi;
};

// Bisection on the switching rate driven by statistically resolved signs of
// the Lyapunov exponent. When a sign call stays unresolved the horizon is
// doubled up to the cap, then the search errors out: near the critical rate
// the exponent vanishes and no Monte-Carlo budget resolves it.
CriticalRateResult critical_rate(
    const std::function<LinearSwitchedSystem(double)>& make_system,
    double rate_lo, double rate_hi, double tol,
    const CriticalRateOptions& opt = {});

// ---------------------------------------------------------------------------
// Contraction criteria and coupling
// ---------------------------------------------------------------------------

// One-sided contraction coefficient of a linear field x' = m x in the
// Euclidean norm: minus the largest eigenvalue of the symmetric part.
double contraction_coefficient(const Eigen::MatrixXd& m);

// Empirical lower-envelope estimate over sampled pairs in a box region.
// It does not bound the true coefficient; it is labeled empirical.
double contraction_coefficient_sampled(const VectorField& f,
                                       const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi, int n_pairs,
                                       RngStream& rng);

struct ContractionReport {
  std::vector<double> rho;   // per-environment contraction coefficient
  Eigen::VectorXd nu;        // stationary law of the environment
  double criterion;          // sum_i rho(i) nu(i)
  bool verdict;              // criterion > 0
};
ContractionReport average_criterion(const std::vector<double>& rho,
                                    const Eigen::VectorXd& nu);

struct CouplingPath {
  std::vector<double> t;
  std::vector<double> distance;  // |X_t - X'_t|, same environment and noise
  std::vector<double> bound;     // |dX_0| exp(-int rho(I_s) ds)
};

// Two trajectories driven by one environment path; the recorded bound is the
// Gronwall consequence of the per-field one-sided contraction inequality
// (the squared distance decays at twice the coefficient, so the distance
// itself decays at rho).
CouplingPath two_point_coupling(const LinearSwitchedSystem& sys,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0_prime, double horizon,
                                double grid_dt, RngStream& rng,
                                const StepControl& ctrl = {});

// Integrates the rate-averaged field x' = sum_i nu(i) F_i(x).
Eigen::VectorXd averaged_ode_limit(const SwitchedSystem& sys,
                                   const Eigen::VectorXd& nu,
                                   const Eigen::VectorXd& x0, double t,
                                   const StepControl& ctrl = {});

// ---------------------------------------------------------------------------
// Discrete multiplicative chain
// ---------------------------------------------------------------------------

struct ProductChainResult {
  std::vector<double> log_path;    // log Y_0 .. log Y_n
  stats::MeanCI mean_log_factor;   // (1/n) sum ln Theta_k with CI
  enum class Verdict { Grows, Shrinks, Unresolved } verdict;
};

// Simulates Y_{k+1} = Theta_k Y_k in log space; a nonpositive sampled factor
// is a hard error.
ProductChainResult product_chain(const std::function<double(RngStream&)>& theta,
                                 int n, double y0, RngStream& rng);

}  // namespace pdmplab::switched
