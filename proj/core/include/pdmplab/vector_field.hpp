#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace pdmplab {

// Autonomous vector field on R^d with an optional registered analytic
// solution (used to cross-check the integrator) and an optional admissible
// region predicate.
struct VectorField {
  int dimension = 0;
  // Writes dx/dt into `out` (preallocated to `dimension`).
  std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& out)> eval;
  // Optional analytic flow x0 -> x(t).
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x0, double t)> closed_form;
  // Optional admissible region; integration errors out on exit.
  std::function<bool(const Eigen::VectorXd& x)> admissible;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(dimension);
    eval(x, out);
    return out;
  }
};

// x' = m x, with the matrix exponential registered as closed form.
VectorField linear_field(const Eigen::MatrixXd& m);

// Scalar x' = a x (closed form: exponential).
VectorField scalar_growth_field(double a);

// Zero field of the given dimension.
VectorField zero_field(int dimension);

// Constant-derivative field.
VectorField constant_field(const Eigen::VectorXd& c);

// Planar competitive population field
//   x' = alpha x (1 - a x - b y),  y' = beta y (1 - c x - d y)
// restricted to the positive orthant.
struct LotkaVolterraParams {
  double alpha, beta;
  double a, b, c, d;
};
VectorField lotka_volterra_field(const LotkaVolterraParams& p);

}  // namespace pdmplab
