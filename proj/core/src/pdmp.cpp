#include "pdmplab/pdmp.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pdmplab {

bool StateSpace::contains(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::All:
      return true;
    case Kind::PositiveOrthant:
      return (x.array() >= 0.0).all();
    case Kind::Box:
      return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  return true;
}

StateSpace StateSpace::all() { return {}; }

StateSpace StateSpace::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  StateSpace s;
  s.kind = Kind::Box;
  s.lo = lo;
  s.hi = hi;
  return s;
}

StateSpace StateSpace::positive_orthant() {
  StateSpace s;
  s.kind = Kind::PositiveOrthant;
  return s;
}

SwitchedSystem::SwitchedSystem(std::vector<VectorField> fields_, RateMatrix env_,
                               StateSpace space_)
    : fields(std::move(fields_)), env(std::move(env_)), space(space_) {
  if (fields.empty())
    throw std::invalid_argument("SwitchedSystem: no vector fields");
  if (static_cast<int>(fields.size()) != env.size())
    throw std::invalid_argument(
        "SwitchedSystem: environment states must index the fields exactly");
  for (const auto& f : fields)
    if (f.dimension != fields.front().dimension)
      throw std::invalid_argument("SwitchedSystem: fields of mixed dimension");
}

namespace {

struct Recorder {
  Trajectory* traj;
  double record_dt;
  double next_record = 0.0;
  double last_time = -1.0;

  void sample(double t, const Eigen::VectorXd& x, int env) {
    if (t <= last_time) return;  // keep times strictly increasing
    traj->times.push_back(t);
    traj->states.push_back(x);
    traj->env.push_back(env);
    last_time = t;
  }

  bool due(double t) const { return record_dt > 0.0 && t >= next_record; }
};

}  // namespace

Trajectory simulate_pdmp(const SwitchedSystem& sys, const Eigen::VectorXd& x0,
                         int y0, double horizon, RngStream& rng,
                         const JumpSpec* jumps, const BoundarySpec* boundary,
                         const PdmpOptions& opt) {
  if (horizon <= 0.0)
    throw std::invalid_argument("simulate_pdmp: horizon must be > 0");
  if (!sys.space.contains(x0))
    throw std::invalid_argument("simulate_pdmp: x0 outside the state space");
  if (jumps) {
    if (!jumps->rate || !jumps->transition)
      throw std::invalid_argument("simulate_pdmp: incomplete jump specification");
    if (jumps->majorant <= 0.0)
      throw std::invalid_argument(
          "simulate_pdmp: thinning requires a positive caller-supplied majorant");
  }

  // The environment never depends on X in the models served here, so its
  // path conditions everything else and can be drawn first.
  const CtmcPath env_path = simulate_ctmc(sys.env, y0, horizon, rng);

  Trajectory traj;
  Recorder rec{&traj, opt.record_dt};
  Eigen::VectorXd x = x0;
  rec.sample(0.0, x, y0);
  if (opt.record_dt > 0.0) rec.next_record = opt.record_dt;

  // Next proposed spontaneous-jump time (thinning candidate).
  double next_candidate =
      jumps ? rng.exponential(jumps->majorant) : INFINITY;

  std::vector<Rk4Stepper> steppers;
  steppers.reserve(sys.fields.size());
  for (const auto& f : sys.fields) steppers.emplace_back(f);

  Eigen::VectorXd probe(sys.dimension());

  for (std::size_t seg = 0; seg < env_path.size(); ++seg) {
    const int env = env_path[seg].state;
    const double seg_end = env_path[seg].t_end;
    double t = env_path[seg].t_begin;
    Rk4Stepper* stepper = &steppers[env];

    while (t < seg_end) {
      if (seg_end - t <= 1e-12 * std::max(1.0, std::fabs(t))) {
        t = seg_end;
        break;
      }
      double step = std::min(opt.step.h, seg_end - t);
      bool stop_at_candidate = false;
      if (t + step >= next_candidate && next_candidate <= seg_end) {
        step = next_candidate - t;
        stop_at_candidate = true;
      }

      Eigen::VectorXd x_prev = x;
      if (step > 0.0) stepper->step(x, step);
      double t_new = t + step;

      // Boundary crossing inside this step?
      if (boundary) {
        const double g_prev = boundary->functional(x_prev);
        const double g_next = boundary->functional(x);
        if (g_next == 0.0 || (g_prev < 0.0) != (g_next < 0.0)) {
          double lo = 0.0, hi = step;
          while (hi - lo > kHitTimeTolerance) {
            const double mid = 0.5 * (lo + hi);
            probe = x_prev;
            stepper->step(probe, mid);
            const double g_mid = boundary->functional(probe);
            if ((g_prev < 0.0) != (g_mid < 0.0))
              hi = mid;
            else
              lo = mid;
          }
          probe = x_prev;
          stepper->step(probe, hi);
          const double t_hit = t + hi;
          traj.events.push_back({t_hit, EventTag::BoundaryHit, env, env});
          rec.sample(t_hit, probe, env);
          x = boundary->reset(probe, env, rng);
          traj.events.push_back({t_hit, EventTag::Reset, env, env});
          rec.sample(std::nextafter(t_hit, INFINITY), x, env);
          t = t_hit;
          // A candidate inside the skipped remainder still applies later.
          continue;
        }
      }

      if (!sys.space.contains(x)) {
        throw RegionExitError(t_new, x);
      }

      if (stop_at_candidate) {
        // Thinning: accept with probability rate/majorant evaluated at the
        // flow position of the candidate time.
        const double lambda = jumps->rate(x, env);
        if (lambda > jumps->majorant * (1.0 + 1e-12)) {
          std::ostringstream msg;
          msg << "simulate_pdmp: jump rate " << lambda
              << " exceeds the declared majorant " << jumps->majorant
              << " at state [" << x.transpose() << "]";
          throw std::runtime_error(msg.str());
        }
        if (rng.uniform01() * jumps->majorant < lambda) {
          traj.events.push_back({t_new, EventTag::SpontaneousJump, env, env});
          rec.sample(t_new, x, env);
          x = jumps->transition(x, env, rng);
          traj.events.push_back({t_new, EventTag::Reset, env, env});
          rec.sample(std::nextafter(t_new, INFINITY), x, env);
        }
        next_candidate = t_new + rng.exponential(jumps->majorant);
      }

      t = t_new;
      if (rec.due(t)) {
        rec.sample(t, x, env);
        while (rec.next_record <= t) rec.next_record += opt.record_dt;
      }
    }

    // Record the state at the env switch itself (continuous across it).
    if (seg + 1 < env_path.size()) {
      const int env_next = env_path[seg + 1].state;
      traj.events.push_back({seg_end, EventTag::EnvJump, env, env_next});
      rec.sample(seg_end, x, env_next);
    }
  }

  rec.sample(horizon, x, env_path.back().state);
  return traj;
}

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

namespace detail {

void parallel_for_replicas(std::size_t n, int n_threads,
                           const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  int workers = n_threads > 0 ? n_threads : hardware_threads();
  workers = std::min<std::size_t>(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

}  // namespace pdmplab
