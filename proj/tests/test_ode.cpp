#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdmplab/ode.hpp"
#include "pdmplab/switched.hpp"
#include "pdmplab/vector_field.hpp"

using namespace pdmplab;

TEST_CASE("zero field is the identity flow") {
  const auto f = zero_field(3);
  Eigen::VectorXd x0(3);
  x0 << 1.0, -2.0, 0.5;
  const auto x = integrate_flow(f, x0, 4.0);
  CHECK((x - x0).norm() == 0.0);
}

TEST_CASE("scalar exponential growth") {
  const auto f = scalar_growth_field(0.7);
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  const auto x = integrate_flow(f, x0, 3.0);
  const double exact = 2.0 * std::exp(0.7 * 3.0);
  CHECK(std::fabs(x(0) - exact) / exact < 1e-8);
}

TEST_CASE("planar spiral flow matches its analytic solution") {
  const auto f = linear_field(switched::planar_matrix_1());
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  // 100-point grid on [0, 10], relative error below 1e-8 throughout.
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double t = 0.1 * i;
    const auto num = integrate_flow(f, x0, t);
    const auto exact = switched::planar_closed_form(1.0, 0.0, t);
    worst = std::max(worst, (num - Eigen::VectorXd(exact)).norm() / exact.norm());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("closed-form oracle holds for every registered field") {
  std::vector<VectorField> fields;
  fields.push_back(linear_field(switched::planar_matrix_0()));
  fields.push_back(linear_field(switched::planar_matrix_1()));
  fields.push_back(scalar_growth_field(-0.3));
  fields.push_back(zero_field(2));
  Eigen::VectorXd c(2);
  c << 0.3, -0.1;
  fields.push_back(constant_field(c));
  for (const auto& f : fields) {
    REQUIRE(static_cast<bool>(f.closed_form));
    Eigen::VectorXd x0 = Eigen::VectorXd::Ones(f.dimension);
    for (int i = 1; i <= 100; ++i) {
      const double t = 0.1 * i;
      const auto num = integrate_flow(f, x0, t);
      const auto exact = f.closed_form(x0, t);
      const double scale = std::max(1e-12, exact.norm());
      REQUIRE((num - exact).norm() / scale < 1e-8);
    }
  }
}

TEST_CASE("analytic spiral solution satisfies its own differential equation") {
  // Central finite difference of the closed form against the field.
  const auto m = switched::planar_matrix_1();
  const double h = 1e-6;
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.25 * i;
    const auto fwd = switched::planar_closed_form(1.0, 0.5, t + h);
    const auto bwd = switched::planar_closed_form(1.0, 0.5, t - h);
    const Eigen::Vector2d fd = (fwd - bwd) / (2.0 * h);
    const Eigen::Vector2d rhs = m * switched::planar_closed_form(1.0, 0.5, t);
    CHECK((fd - rhs).norm() <= 1e-6);
  }
}

TEST_CASE("adaptive stepping reaches the requested tolerance") {
  const auto f = linear_field(switched::planar_matrix_1());
  Eigen::VectorXd x0(2);
  x0 << 1.0, 0.0;
  StepControl ctrl;
  ctrl.adaptive = true;
  ctrl.h = 0.5;  // coarse start; the controller must refine
  ctrl.rel_tol = 1e-10;
  const auto x = integrate_flow(f, x0, 5.0, ctrl);
  const auto exact = switched::planar_closed_form(1.0, 0.0, 5.0);
  CHECK((x - Eigen::VectorXd(exact)).norm() / exact.norm() < 1e-6);
}

TEST_CASE("hit time of a linear clock") {
  const auto f = constant_field(Eigen::VectorXd::Ones(1));
  Eigen::VectorXd x0(1);
  x0 << 0.0;
  const auto hit = hit_time(f, x0, [](const Eigen::VectorXd& x) { return x(0) - 1.0; }, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->time == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hit time of exponential growth at level e") {
  const auto f = scalar_growth_field(1.0);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const auto hit = hit_time(
      f, x0, [](const Eigen::VectorXd& x) { return x(0) - std::exp(1.0); }, 10.0);
  REQUIRE(hit.has_value());
  CHECK(std::fabs(hit->time - 1.0) < 1e-9);
}

TEST_CASE("hit time with slope two") {
  Eigen::VectorXd two(1);
  two << 2.0;
  const auto f = constant_field(two);
  Eigen::VectorXd x0(1);
  x0 << 0.3;
  const auto hit = hit_time(f, x0, [](const Eigen::VectorXd& x) { return x(0) - 1.0; }, 10.0);
  REQUIRE(hit.has_value());
  CHECK(hit->time == doctest::Approx(0.35).epsilon(1e-9));
}

TEST_CASE("no crossing before the horizon returns nothing") {
  const auto f = constant_field(Eigen::VectorXd::Ones(1));
  Eigen::VectorXd x0(1);
  x0 << 0.0;
  const auto hit = hit_time(f, x0, [](const Eigen::VectorXd& x) { return x(0) - 5.0; }, 1.0);
  CHECK_FALSE(hit.has_value());
}

TEST_CASE("leaving the admissible region raises with an exit estimate") {
  VectorField f = constant_field(-Eigen::VectorXd::Ones(1));
  f.admissible = [](const Eigen::VectorXd& x) { return x(0) >= 0.0; };
  Eigen::VectorXd x0(1);
  x0 << 0.5;
  CHECK_THROWS_AS(integrate_flow(f, x0, 2.0), RegionExitError);
  try {
    integrate_flow(f, x0, 2.0);
  } catch (const RegionExitError& e) {
    CHECK(e.exit_time() == doctest::Approx(0.5).epsilon(0.01));
  }
}

TEST_CASE("negative duration is rejected") {
  const auto f = zero_field(1);
  CHECK_THROWS_AS(integrate_flow(f, Eigen::VectorXd::Zero(1), -1.0),
                  std::invalid_argument);
}
