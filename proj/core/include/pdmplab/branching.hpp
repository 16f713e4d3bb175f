#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdmplab/rng.hpp"
#include "pdmplab/stats.hpp"

namespace pdmplab::branching {

// Deterministic 1-d trait dynamic between divisions. Exponential growth is
// the shipped flow; a generic closure keeps other dynamics pluggable.
struct TraitFlow {
  std::function<double(double x, double dt)> advance;
  std::function<double(double x)> derivative;
};
TraitFlow exponential_trait(double growth_rate);

struct OffspringLaw {
  // p[k] = probability of k children. Children inherit traits from the split
  // kernel. p[1] must vanish.
  std::vector<double> p;

  explicit OffspringLaw(std::vector<double> probs);
  static OffspringLaw binary();                    // p2 = 1
  static OffspringLaw binary_with_death(double p0); // p0 + p2 = 1
  double mean() const;
  int sample(RngStream& rng) const;
};

// Closed-form cumulative hazard along the trait flow, with inverse; enables
// exact division-time sampling.
struct AnalyticHazard {
  std::function<double(double x0, double t)> cumulative;
  std::function<double(double x0, double e)> invert;  // first t with H(t) = e
};

struct BranchingSpec {
  TraitFlow flow;
  std::function<double(double)> division_rate;  // B(x) >= 0
  // Declared growth bound B(x) <= b1 |x|^gamma + b2, checked on a grid.
  double gamma = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  OffspringLaw offspring = OffspringLaw::binary();
  // Traits at birth of k children given the mother's trait at division.
  std::function<std::vector<double>(double x, int k, RngStream&)> kernel;
  std::optional<AnalyticHazard> hazard;
  // Majorant of B(x(s)) over a window [s0, s1] started at trait x; required
  // when no analytic hazard is registered.
  std::function<double(double x, double window)> window_majorant;
  std::size_t population_cap = 1'000'000;

  double declared_mean_bound() const { return offspring.mean(); }
};

// Size-structured instance: exponential trait growth r, division rate
// B(x) = x, equal binary split, analytic hazard inversion registered.
BranchingSpec size_structured_spec(double growth_rate);
// Constant division rate with binary (optionally lethal) offspring.
BranchingSpec constant_rate_spec(double rate, double trait_growth_rate = 0.0,
                                 double p_death = 0.0);

struct AssumptionReport {
  bool rate_bound_ok;       // B(x) <= b1 |x|^gamma + b2 on the grid
  bool mass_condition_ok;   // expected children trait sum <= max(x, x_floor)
  bool mean_bound_ok;       // sum_k k p_k <= declared bound
  double worst_rate_gap;
  double worst_mass_gap;
};
AssumptionReport check_assumptions(const BranchingSpec& spec, double x_lo,
                                   double x_hi, int n_grid, RngStream& rng,
                                   int kernel_samples = 200);

struct Individual {
  std::int64_t parent;       // -1 for the root
  double birth_time;
  double division_time;      // +inf when alive at the horizon
  double trait_at_birth;
};

struct BranchingTree {
  std::vector<Individual> individuals;
  double horizon;
  TraitFlow flow;

  bool alive_at(std::size_t id, double t) const;
  std::vector<std::size_t> alive_set(double t) const;
  std::size_t population_at(double t) const;
  double trait_at(std::size_t id, double t) const;
  // Parent-link structural invariants; throws on violation.
  void validate() const;
};

class PopulationCapError : public std::runtime_error {
 public:
  explicit PopulationCapError(std::size_t cap)
      : std::runtime_error("simulate_tree: population exceeded the cap of " +
                           std::to_string(cap)) {}
};

// Event-driven simulation to the horizon. Division times are sampled by
// analytic hazard inversion when registered and by window thinning
// otherwise.
BranchingTree simulate_tree(const BranchingSpec& spec, double x0, double horizon,
                            RngStream& rng);

// Division time for one individual with birth trait x0; +inf when the
// cumulative hazard never reaches the drawn exponential level within
// max_time (thinning scans no further than max_time).
double division_time_sample(
    double x0, const BranchingSpec& spec, RngStream& rng,
    double max_time = std::numeric_limits<double>::infinity());

// Sum of f over individuals alive at t, traits evaluated at t.
double population_functional(const BranchingTree& tree,
                             const std::function<double(double)>& f, double t);

struct Lineage {
  std::vector<std::size_t> ids;  // root .. sampled individual
  std::size_t sampled;
};
// Uniform pick among the individuals alive at t with its ancestral line.
Lineage uniform_sample_lineage(const BranchingTree& tree, double t,
                               RngStream& rng);
// Trait of the sampled lineage at any time s <= t.
double lineage_trait_at(const BranchingTree& tree, const Lineage& lineage,
                        double s);

// Single-lineage auxiliary process for the constant-division-rate case: the
// trait follows the flow and jumps at the mean-biased rate, drawing the new
// trait from the size-biased offspring marginal (an equal binary split gives
// x -> x/2).
struct SpineSpec {
  double division_rate;     // constant B
  OffspringLaw offspring;   // mean must differ from 1
  TraitFlow flow;

  SpineSpec(double rate, OffspringLaw law, TraitFlow flow_);
  double jump_rate() const { return division_rate * offspring.mean(); }
  // Expected population size at elapsed time t from a single ancestor.
  double mean_population(double t) const;
};

struct SpinePath {
  std::vector<double> jump_times;
  double trait_end;
};
SpinePath simulate_spine(const SpineSpec& spec, double x0, double t,
                         RngStream& rng);

// General time-inhomogeneous auxiliary process for a deterministic trait
// flow with equal splitting: the biased jump rate at time s is
//   B(x) * sum_k k p_k * m(x/k, s, t) / m(x, s, t)
// with m the caller-supplied expected population size started from one
// individual. Simulated by thinning against the caller's majorant. With a
// trait-independent m this reduces to the constant-rate auxiliary process.
struct InhomogeneousSpineSpec {
  std::function<double(double x, double s, double t)> mean_population;
  std::function<double(double)> division_rate;
  OffspringLaw offspring = OffspringLaw::binary();
  TraitFlow flow;
  double rate_majorant = 0.0;  // bound on the biased jump rate over [0, t]
};
SpinePath simulate_spine(const InhomogeneousSpineSpec& spec, double x0, double t,
                         RngStream& rng);

struct ManyToOneCheck {
  stats::Summary population_side;  // MC mean of sum_{alive} f
  stats::Summary spine_side;       // MC mean of f(spine) (unscaled)
  double mean_factor;              // expected population size
  double z;                        // population vs scaled spine
};
ManyToOneCheck many_to_one_check(const BranchingSpec& spec, const SpineSpec& aux,
                                 const std::function<double(double)>& f,
                                 double x0, double t, std::size_t n_rep,
                                 std::uint64_t seed, int n_threads = 0);

struct SamplingLimitPoint {
  std::size_t n_initial;
  stats::Summary sampled;        // f at the sampled individual, over replicas
  std::vector<double> values;    // raw per-replica values (for trend tests)
  double z;                      // against the spine mean
};
struct SamplingLimitCheck {
  std::vector<SamplingLimitPoint> points;
  stats::Summary spine;
};
// Grows n_initial independent trees from the same trait, samples one
// individual uniformly from the union of the alive sets and compares the
// functional with the auxiliary process along a doubling schedule.
SamplingLimitCheck sampling_limit_check(
    const BranchingSpec& spec, const SpineSpec& aux,
    const std::function<double(double)>& f, double x0, double t,
    const std::vector<std::size_t>& n_initial_schedule, std::size_t n_rep,
    std::uint64_t seed, int n_threads = 0);

}  // namespace pdmplab::branching
