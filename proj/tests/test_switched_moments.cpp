#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdmplab/rate_matrix.hpp"
#include "pdmplab/rng.hpp"
#include "pdmplab/stats.hpp"
#include "pdmplab/switched.hpp"

using namespace pdmplab;
using namespace pdmplab::switched;

namespace {

RateMatrix random_irreducible(RngStream& rng, int n) {
  Eigen::MatrixXd r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = (i == j) ? 0.0 : rng.uniform(0.2, 2.0);
  return RateMatrix::from_rates(r);
}

}  // namespace

TEST_CASE("p = 0 gives a vanishing dominant root and the stationary eigenvector") {
  RngStream rng(2024, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const auto q = random_irreducible(rng, n);
    std::vector<double> a(n);
    for (auto& v : a) v = rng.uniform(-2.0, 2.0);
    const auto pm = moment_growth_rate(q, a, 0.0);
    CHECK(std::fabs(pm.lambda) <= 1e-10);
    const auto nu = q.stationary_distribution();
    CHECK((pm.left_eigvec - nu).norm() <= 1e-9);
  }
}

TEST_CASE("two-state closed form: symmetric rates, opposite growth") {
  const auto q = RateMatrix::symmetric_two_state(1.0);
  const std::vector<double> a{1.0, -1.0};
  for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double expected = -1.0 + std::sqrt(1.0 + p * p);
    CHECK(moment_growth_rate(q, a, p).lambda ==
          doctest::Approx(expected).epsilon(1e-10));
  }
  // p = 1 evaluates to sqrt(2) - 1.
  CHECK(moment_growth_rate(q, a, 1.0).lambda ==
        doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("two-state closed form: drift toward extinction") {
  const auto q = RateMatrix::symmetric_two_state(1.0);
  const std::vector<double> a{-2.0, 1.0};
  const double expected = (-2.1 + std::sqrt(4.09)) / 2.0;
  CHECK(moment_growth_rate(q, a, 0.1).lambda ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected < 0.0);
}

TEST_CASE("reducible generators are rejected") {
  const auto q = RateMatrix::from_rates(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(moment_growth_rate(q, {1.0, -1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("moment ratio via the matrix exponential") {
  const auto q = RateMatrix::symmetric_two_state(1.0);
  const std::vector<double> a{1.0, -1.0};
  Eigen::VectorXd mu0(2);
  mu0 << 1.0, 0.0;
  SUBCASE("t = 0 is exactly one") {
    CHECK(moment_feynman_kac(q, a, 1.0, 0.0, mu0) == doctest::Approx(1.0));
  }
  SUBCASE("single environment reduces to a scalar exponential") {
    const auto single = RateMatrix::single_state();
    Eigen::VectorXd one(1);
    one << 1.0;
    const double got = moment_feynman_kac(single, {0.4}, 2.0, 3.0, one);
    CHECK(got == doctest::Approx(std::exp(2.0 * 0.4 * 3.0)).epsilon(1e-9));
  }
  SUBCASE("Monte-Carlo cross-check within three standard errors") {
    const double t = 5.0;
    const double exact = moment_feynman_kac(q, a, 1.0, t, mu0);
    const auto mc = feynman_kac_mc(q, a, 1.0, t, mu0, 100000, 99);
    CHECK(std::fabs(mc.mean - exact) < 3.0 * mc.se);
  }
}

TEST_CASE("moment dichotomy") {
  const auto q = RateMatrix::symmetric_two_state(1.0);
  SUBCASE("constant growth rates act as a single environment") {
    const DichotomyReport rep = moment_dichotomy(q, {0.7, 0.7});
    CHECK(rep.nu_a == doctest::Approx(0.7));
    CHECK(rep.regime == DichotomyReport::Regime::MomentsDiverge);
    // lambda_p = p c for constant rates.
    CHECK(moment_growth_rate(q, {0.7, 0.7}, 2.0).lambda ==
          doctest::Approx(1.4).epsilon(1e-9));
  }
  SUBCASE("negative stationary drift has a decaying-moment window") {
    const DichotomyReport rep = moment_dichotomy(q, {-2.0, 1.0});
    CHECK(rep.nu_a == doctest::Approx(-0.5));
    CHECK(rep.regime == DichotomyReport::Regime::MomentsDecay);
    // The root of lambda_p sits at p = 1/2 for this pair.
    CHECK(rep.window_hi == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(moment_growth_rate(q, {-2.0, 1.0}, rep.p_star).lambda < 0.0);
    // p = 0.1 qualifies as a decaying order.
    CHECK(moment_growth_rate(q, {-2.0, 1.0}, 0.1).lambda ==
          doctest::Approx(-0.0388).epsilon(1e-2));
  }
  SUBCASE("zero stationary drift is critical yet all moments grow") {
    const DichotomyReport rep = moment_dichotomy(q, {1.0, -1.0});
    CHECK(rep.regime == DichotomyReport::Regime::Critical);
    for (double p : {0.5, 1.0, 2.0})
      CHECK(moment_growth_rate(q, {1.0, -1.0}, p).lambda > 0.0);
  }
}

TEST_CASE("derivative of the dominant root at zero equals the stationary average") {
  SUBCASE("hand-checked instances") {
    const auto q = RateMatrix::symmetric_two_state(1.0);
    CHECK(derivative_check(q, {1.0, -1.0}) <= 1e-6);
    CHECK(derivative_check(q, {-2.0, 1.0}) <= 1e-6);
    CHECK(derivative_check(q, {0.9, 0.9}) <= 1e-6);
  }
  SUBCASE("random battery of 50 generators on 2..5 states") {
    RngStream rng(7, 7);
    for (int rep = 0; rep < 50; ++rep) {
      const int n = 2 + static_cast<int>(rng.uniform_below(4));
      const auto q = random_irreducible(rng, n);
      std::vector<double> a(n);
      for (auto& v : a) v = rng.uniform(-2.0, 2.0);
      CHECK(derivative_check(q, a) <= 1e-6);
    }
  }
}

TEST_CASE("growth rate curve starts at zero") {
  const auto q = RateMatrix::two_state(1.0, 2.0);
  const auto curve = growth_rate_curve(q, {0.5, -1.0}, {0.0, 0.5, 1.0, 2.0});
  CHECK(std::fabs(curve.lambda[0]) <= 1e-10);
  CHECK(curve.derivative_at_zero ==
        doctest::Approx(stationary_average(q, {0.5, -1.0})).epsilon(1e-3));
}

TEST_CASE("planar closed form: identity at zero and a quarter-turn value") {
  const auto at0 = planar_closed_form(0.7, -0.3, 0.0);
  CHECK(at0(0) == doctest::Approx(0.7));
  CHECK(at0(1) == doctest::Approx(-0.3));
  // Half a rotation from (0, 1) lands on (0, -exp(-pi)).
  const auto at_pi = planar_closed_form(0.0, 1.0, M_PI);
  CHECK(std::fabs(at_pi(0)) <= 1e-15);
  CHECK(at_pi(1) == doctest::Approx(-std::exp(-M_PI)).epsilon(1e-12));
}

TEST_CASE("decaying orders are monotone in time along common paths") {
  // With a = (-2, 1) and q symmetric, lambda_{0.2} < 0: the 0.2-moment must
  // shrink between two large times. Common environment paths pair the two
  // time points for a tight one-sided test.
  const auto q = RateMatrix::symmetric_two_state(1.0);
  const std::vector<double> a{-2.0, 1.0};
  const double p = 0.2, t1 = 10.0, t2 = 15.0;
  const int n = 20000;
  std::vector<double> diffs(n);
  for (int rep = 0; rep < n; ++rep) {
    RngStream rng(31337, static_cast<std::uint64_t>(rep));
    const auto path = simulate_ctmc(q, 0, t2, rng);
    double upto_t1 = 0.0, upto_t2 = 0.0;
    for (const auto& seg : path) {
      const double hi1 = std::min(seg.t_end, t1);
      if (seg.t_begin < t1) upto_t1 += a[seg.state] * (hi1 - seg.t_begin);
      upto_t2 += a[seg.state] * (seg.t_end - seg.t_begin);
    }
    diffs[rep] = std::exp(p * upto_t2) - std::exp(p * upto_t1);
  }
  const auto s = stats::summarize(diffs);
  CHECK(s.mean + 3.0 * s.se < 0.0);
}
