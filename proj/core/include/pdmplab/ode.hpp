#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>

#include "pdmplab/vector_field.hpp"

namespace pdmplab {

// Classical 4th-order one-step integration. The default is fixed stepping
// (reproducible in tests); step doubling gives an adaptive option for
// stiffer user-supplied fields.
struct StepControl {
  double h = 1e-3;          // base step
  bool adaptive = false;    // step-doubling error control
  double rel_tol = 1e-9;    // local relative error target (adaptive mode)
};

// Thrown when the state leaves a field's admissible region with no boundary
// handler registered; carries the bracketing estimate of the exit time.
class RegionExitError : public std::runtime_error {
 public:
  RegionExitError(double exit_time_estimate, const Eigen::VectorXd& state);
  double exit_time() const { return exit_time_; }
  const Eigen::VectorXd& state() const { return state_; }

 private:
  double exit_time_;
  Eigen::VectorXd state_;
};

// Single 4th-order step, in place. Reusable workspace avoids per-step
// allocation in long simulations.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(const VectorField& f);
  void step(Eigen::VectorXd& x, double h);

 private:
  const VectorField* f_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, tmp_;
};

// Integrates x' = f(x) for duration t.
Eigen::VectorXd integrate_flow(const VectorField& f, const Eigen::VectorXd& x0,
                               double t, const StepControl& ctrl = {});

// As integrate_flow, additionally calling `observe(t, x)` after every
// accepted step (and at t = 0).
Eigen::VectorXd integrate_flow_observed(
    const VectorField& f, const Eigen::VectorXd& x0, double t,
    const StepControl& ctrl,
    const std::function<void(double, const Eigen::VectorXd&)>& observe);

struct HitResult {
  double time;
  Eigen::VectorXd state;
};

// First time t <= horizon at which `functional` changes sign along the flow,
// located by per-step sign bracketing and bisection to 1e-10 time units.
// Tangential grazing without a sign change is not detected.
std::optional<HitResult> hit_time(
    const VectorField& f, const Eigen::VectorXd& x0,
    const std::function<double(const Eigen::VectorXd&)>& functional,
    double horizon, const StepControl& ctrl = {});

inline constexpr double kHitTimeTolerance = 1e-10;

}  // namespace pdmplab
