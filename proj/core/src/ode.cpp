#include "pdmplab/ode.hpp"

#include <cmath>

namespace pdmplab {

RegionExitError::RegionExitError(double exit_time_estimate,
                                 const Eigen::VectorXd& state)
    : std::runtime_error("integrate_flow: state left the admissible region near t=" +
                         std::to_string(exit_time_estimate)),
      exit_time_(exit_time_estimate),
      state_(state) {}

Rk4Stepper::Rk4Stepper(const VectorField& f)
    : f_(&f),
      k1_(f.dimension),
      k2_(f.dimension),
      k3_(f.dimension),
      k4_(f.dimension),
      tmp_(f.dimension) {}

void Rk4Stepper::step(Eigen::VectorXd& x, double h) {
  f_->eval(x, k1_);
  tmp_ = x + 0.5 * h * k1_;
  f_->eval(tmp_, k2_);
  tmp_ = x + 0.5 * h * k2_;
  f_->eval(tmp_, k3_);
  tmp_ = x + h * k3_;
  f_->eval(tmp_, k4_);
  x += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

namespace {

void check_region(const VectorField& f, const Eigen::VectorXd& x, double t) {
  if (f.admissible && !f.admissible(x)) throw RegionExitError(t, x);
}

}  // namespace

Eigen::VectorXd integrate_flow_observed(
    const VectorField& f, const Eigen::VectorXd& x0, double t,
    const StepControl& ctrl,
    const std::function<void(double, const Eigen::VectorXd&)>& observe) {
  if (t < 0.0) throw std::invalid_argument("integrate_flow: negative duration");
  if (x0.size() != f.dimension)
    throw std::invalid_argument("integrate_flow: dimension mismatch");
  check_region(f, x0, 0.0);
  Eigen::VectorXd x = x0;
  if (observe) observe(0.0, x);
  if (t == 0.0) return x;

  Rk4Stepper stepper(f);
  double now = 0.0;
  double h = std::min(ctrl.h, t);

  if (!ctrl.adaptive) {
    while (now < t) {
      const double step = std::min(h, t - now);
      stepper.step(x, step);
      now += step;
      check_region(f, x, now);
      if (observe) observe(now, x);
    }
    return x;
  }

  // Step doubling: one full step vs two half steps; 4th-order Richardson
  // error estimate err/15.
  Eigen::VectorXd x_full(f.dimension), x_half(f.dimension);
  while (now < t) {
    const double step = std::min(h, t - now);
    x_full = x;
    stepper.step(x_full, step);
    x_half = x;
    stepper.step(x_half, 0.5 * step);
    stepper.step(x_half, 0.5 * step);
    const double scale = x_half.norm() + 1e-30;
    const double err = (x_full - x_half).norm() / (15.0 * scale);
    if (err <= ctrl.rel_tol || step <= 1e-14) {
      x = x_half;
      now += step;
      check_region(f, x, now);
      if (observe) observe(now, x);
      if (err < 0.1 * ctrl.rel_tol) h = std::min(2.0 * step, ctrl.h * 1e3);
    } else {
      h = 0.5 * step;
    }
  }
  return x;
}

Eigen::VectorXd integrate_flow(const VectorField& f, const Eigen::VectorXd& x0,
                               double t, const StepControl& ctrl) {
  return integrate_flow_observed(f, x0, t, ctrl, nullptr);
}

std::optional<HitResult> hit_time(
    const VectorField& f, const Eigen::VectorXd& x0,
    const std::function<double(const Eigen::VectorXd&)>& functional,
    double horizon, const StepControl& ctrl) {
  if (horizon < 0.0) throw std::invalid_argument("hit_time: negative horizon");
  Eigen::VectorXd x = x0;
  double g_prev = functional(x);
  if (g_prev == 0.0) return HitResult{0.0, x};

  Rk4Stepper stepper(f);
  double now = 0.0;
  Eigen::VectorXd x_prev = x;
  Eigen::VectorXd probe(f.dimension);
  while (now < horizon) {
    const double step = std::min(ctrl.h, horizon - now);
    x_prev = x;
    stepper.step(x, step);
    const double g_next = functional(x);
    if (g_next == 0.0) return HitResult{now + step, x};
    if ((g_prev < 0.0) != (g_next < 0.0)) {
      // Sign change inside [now, now+step]: bisect on the substep length,
      // re-stepping from the bracketing state each time (a single 4th-order
      // step over a span <= h keeps the local error negligible).
      double lo = 0.0, hi = step;
      while (hi - lo > kHitTimeTolerance) {
        const double mid = 0.5 * (lo + hi);
        probe = x_prev;
        stepper.step(probe, mid);
        const double g_mid = functional(probe);
        if (g_mid == 0.0) return HitResult{now + mid, probe};
        if ((g_prev < 0.0) != (g_mid < 0.0))
          hi = mid;
        else
          lo = mid;
      }
      probe = x_prev;
      stepper.step(probe, hi);
      return HitResult{now + hi, probe};
    }
    g_prev = g_next;
    now += step;
  }
  return std::nullopt;
}

}  // namespace pdmplab
