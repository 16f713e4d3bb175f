#include "pdmplab/vector_field.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace pdmplab {

VectorField linear_field(const Eigen::MatrixXd& m) {
  VectorField f;
  f.dimension = static_cast<int>(m.rows());
  f.eval = [m](const Eigen::VectorXd& x, Eigen::VectorXd& out) { out.noalias() = m * x; };
  f.closed_form = [m](const Eigen::VectorXd& x0, double t) -> Eigen::VectorXd {
    return (t * m).exp() * x0;
  };
  return f;
}

VectorField scalar_growth_field(double a) {
  VectorField f;
  f.dimension = 1;
  f.eval = [a](const Eigen::VectorXd& x, Eigen::VectorXd& out) { out(0) = a * x(0); };
  f.closed_form = [a](const Eigen::VectorXd& x0, double t) -> Eigen::VectorXd {
    Eigen::VectorXd r(1);
    r(0) = x0(0) * std::exp(a * t);
    return r;
  };
  return f;
}

VectorField zero_field(int dimension) {
  VectorField f;
  f.dimension = dimension;
  f.eval = [](const Eigen::VectorXd&, Eigen::VectorXd& out) { out.setZero(); };
  f.closed_form = [](const Eigen::VectorXd& x0, double) { return x0; };
  return f;
}

VectorField constant_field(const Eigen::VectorXd& c) {
  VectorField f;
  f.dimension = static_cast<int>(c.size());
  f.eval = [c](const Eigen::VectorXd&, Eigen::VectorXd& out) { out = c; };
  f.closed_form = [c](const Eigen::VectorXd& x0, double t) -> Eigen::VectorXd {
    return x0 + t * c;
  };
  return f;
}

VectorField lotka_volterra_field(const LotkaVolterraParams& p) {
  VectorField f;
  f.dimension = 2;
  f.eval = [p](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out(0) = p.alpha * v(0) * (1.0 - p.a * v(0) - p.b * v(1));
    out(1) = p.beta * v(1) * (1.0 - p.c * v(0) - p.d * v(1));
  };
  f.admissible = [](const Eigen::VectorXd& v) { return v(0) >= 0.0 && v(1) >= 0.0; };
  return f;
}

}  // namespace pdmplab
