#pragma once

#include <cstdint>
#include <vector>

#include "pdmplab/rng.hpp"

namespace pdmplab::gene {

// Two-stage production of one protein species over a periodic cell cycle:
// transcript synthesis at rate lambda1 (doubled from the replication instant
// tau_r onward), transcript decay at rate sigma1 per copy, translation at
// rate lambda2 per transcript, no protein decay. Division every tau_d keeps
// each molecule with probability 1/2 and the cell volume doubles
// exponentially over the cycle.
struct GeneParams {
  double lambda1;  // transcription rate
  double sigma1;   // per-transcript degradation rate
  double lambda2;  // per-transcript translation rate
  double tau_r;    // replication instant within the cycle
  double tau_d;    // cycle length
  double v0;       // volume at birth

  void validate() const;
};

// First and second moments of the (transcript, protein) pair.
struct MomentVector {
  double em = 0.0;      // E[M]
  double ep = 0.0;      // E[P]
  double var_m = 0.0;   // Var[M]
  double var_p = 0.0;   // Var[P]
  double cov_mp = 0.0;  // Cov[M, P]

  // Cauchy-Schwarz and nonnegativity sanity check.
  bool coherent(double tol = 1e-9) const;
};

// Equilibrium transcript mean at cycle phase s (the transcript marginal is
// Poisson with this parameter).
double mrna_poisson_parameter(const GeneParams& p, double s);

// One-cycle affine map on the transcript mean: closed-form relaxation toward
// k/sigma1 on each production regime, then halving at division. Its fixed
// point is an independent route to the phase-0 transcript mean.
struct CycleMeanMap {
  double slope;    // contraction factor exp(-sigma1 tau_d) / 2
  double offset;
  double fixed_point() const { return offset / (1.0 - slope); }
  double apply(double x0) const { return slope * x0 + offset; }
};
CycleMeanMap cycle_mean_map(const GeneParams& p);

// Transcript-mean profile within one cycle given the phase-0 mean.
double mean_profile(const GeneParams& p, double x_start, double s);

// Protein mean at phase s < tau_r from the phase-0 moments (closed form).
double protein_mean(const GeneParams& p, const MomentVector& m0, double s);
// Protein variance at phase s < tau_r from the phase-0 moments (closed
// form, independently derived; cross-checked against the ODE engine).
double protein_variance(const GeneParams& p, const MomentVector& m0, double s);

// Propagates the five moments across [s0, s1] inside one production regime
// (transcription rate lambda1, doubled when `doubled` is set) through the
// closed moment system of the linear birth-death-catalysis network, solved
// with the exact affine propagator.
MomentVector moment_ode_propagate(const GeneParams& p, const MomentVector& m0,
                                  double s0, double s1, bool doubled);

// Independent binomial thinning of both species with retention 1/2.
MomentVector division_map(const MomentVector& m);

// Cycle-start moments at equilibrium: the unique fixed point of the affine
// whole-cycle map, found by a direct 5x5 linear solve.
MomentVector equilibrium_moments(const GeneParams& p);

// Moments at arbitrary phases of the equilibrium cycle.
std::vector<MomentVector> equilibrium_profile(const GeneParams& p,
                                              const std::vector<double>& phases);

double volume_at(const GeneParams& p, double s);

// --------------------------------------------------------------------------
// Exact simulation
// --------------------------------------------------------------------------

// Instantaneous state of the followed cell.
struct CellState {
  std::uint64_t m = 0;      // transcript count
  std::uint64_t p = 0;      // protein count
  double phase = 0.0;       // position in the cycle, reset at division
  std::uint64_t cycle = 0;
};

struct LineageSamples {
  std::vector<double> phases;
  // samples[phase][cycle]
  std::vector<std::vector<std::uint32_t>> m;
  std::vector<std::vector<std::uint32_t>> p;
};

struct LineageOptions {
  std::size_t burn_in_cycles = 50;
  std::size_t thin = 1;          // record every thin-th cycle
  std::uint64_t count_cap = 50'000'000;
  std::uint64_t initial_m = 0;
  std::uint64_t initial_p = 0;
};

// Follows one daughter cell through n_cycles division cycles with the exact
// event-driven scheme (exponential races between transcription, decay and
// translation; deterministic rate doubling and division interleaved).
LineageSamples simulate_cell_lineage(const GeneParams& p, std::size_t n_cycles,
                                     const std::vector<double>& phases,
                                     RngStream& rng,
                                     const LineageOptions& opt = {});

struct ConcentrationRow {
  double s;
  double mean_conc_m;
  double mean_conc_p;
  double cv_m;  // Var / mean^2 of M/V(s)
  double cv_p;  // Var / mean^2 of P/V(s)
};

struct ConcentrationStats {
  std::vector<ConcentrationRow> rows;
  double mu_p;                    // cycle-averaged mean protein concentration
  double fluctuation_amplitude;   // max |E[P_s/V] - mu_p| / mu_p
};

// Simulation-based per-phase concentration statistics.
ConcentrationStats concentration_stats(const GeneParams& p, std::size_t n_cycles,
                                       const std::vector<double>& phases,
                                       RngStream& rng,
                                       const LineageOptions& opt = {});

// --------------------------------------------------------------------------
// Noise scan
// --------------------------------------------------------------------------

struct CvPoint {
  GeneParams params;
  double mu_p;  // cycle-averaged mean protein concentration
  double cv2;   // cycle-pooled Var / mean^2 of the protein concentration
};

// Analytic pipeline: integrates the equilibrium moment profile over the
// cycle (phase drawn uniformly) to produce the global concentration mean
// and squared coefficient of variation.
CvPoint cv_point(const GeneParams& p, int n_quad = 512);
std::vector<CvPoint> cv_scan(const std::vector<GeneParams>& grid);

}  // namespace pdmplab::gene
