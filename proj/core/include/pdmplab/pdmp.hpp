#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "pdmplab/ode.hpp"
#include "pdmplab/rate_matrix.hpp"
#include "pdmplab/rng.hpp"
#include "pdmplab/trajectory.hpp"
#include "pdmplab/vector_field.hpp"

namespace pdmplab {

struct StateSpace {
  enum class Kind { All, Box, PositiveOrthant };
  Kind kind = Kind::All;
  Eigen::VectorXd lo, hi;  // Box bounds

  bool contains(const Eigen::VectorXd& x) const;
  static StateSpace all();
  static StateSpace box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static StateSpace positive_orthant();
};

// A finite family of vector fields selected by a Markovian environment.
struct SwitchedSystem {
  std::vector<VectorField> fields;   // indexed by environment state
  RateMatrix env;
  StateSpace space = StateSpace::all();

  SwitchedSystem(std::vector<VectorField> fields_, RateMatrix env_,
                 StateSpace space_ = StateSpace::all());
  int dimension() const { return fields.front().dimension; }
};

// Spontaneous state-dependent jumps simulated by thinning against a constant
// majorant rate supplied by the caller (the engine cannot bound an arbitrary
// rate function itself).
struct JumpSpec {
  std::function<double(const Eigen::VectorXd&, int env)> rate;
  double majorant = 0.0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int env, RngStream&)>
      transition;
};

// Forced jumps at a boundary described by the zero set of a functional.
struct BoundarySpec {
  std::function<double(const Eigen::VectorXd&)> functional;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int env, RngStream&)>
      reset;
};

struct PdmpOptions {
  StepControl step;
  double record_dt = 0.0;  // 0: record only event times and endpoints
};

// Simulates the switched process on [0, horizon]: the environment path is
// drawn first (it never depends on the continuous state here), flows are
// integrated piecewise between its jumps, spontaneous jumps are thinned
// against the majorant and boundary hits are located by bisection.
Trajectory simulate_pdmp(const SwitchedSystem& sys, const Eigen::VectorXd& x0,
                         int y0, double horizon, RngStream& rng,
                         const JumpSpec* jumps = nullptr,
                         const BoundarySpec* boundary = nullptr,
                         const PdmpOptions& opt = {});

int hardware_threads();

namespace detail {
void parallel_for_replicas(std::size_t n, int n_threads,
                           const std::function<void(std::size_t)>& body);
}

// Evaluates fn(replica_index, stream) for replicas 0..n-1, each with its own
// substream of base_seed. Results land in per-replica slots, so downstream
// reductions are independent of worker scheduling. n_threads = 0 uses the
// hardware count.
template <class T, class Fn>
std::vector<T> replica_map(std::uint64_t base_seed, std::size_t n, Fn fn,
                           int n_threads = 0) {
  std::vector<T> out(n);
  detail::parallel_for_replicas(n, n_threads, [&](std::size_t i) {
    RngStream stream(base_seed, i);
    out[i] = fn(i, stream);
  });
  return out;
}

}  // namespace pdmplab
