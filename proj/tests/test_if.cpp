#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdmplab/if_averaging.hpp"
#include "pdmplab/stats.hpp"

using namespace pdmplab;
using namespace pdmplab::ifa;

namespace {

IFSpec single_env_spec() {
  IFSpec spec;
  spec.env = RateMatrix::single_state();
  spec.celerity = {2.0};
  spec.flow_factor = [](double) { return 1.0; };
  spec.floor = 0.0;
  spec.threshold = 1.0;
  spec.reset = {uniform_reset(0.2, 0.4)};
  spec.initial_law = [](RngStream&) { return 0.5; };
  return spec;
}

}  // namespace

TEST_CASE("celerity-biased boundary law") {
  SUBCASE("constant celerity leaves the stationary law unchanged") {
    Eigen::VectorXd pi(3);
    pi << 0.2, 0.3, 0.5;
    const auto ps = pi_star(pi, {2.0, 2.0, 2.0});
    CHECK((ps - pi).norm() <= 1e-15);
  }
  SUBCASE("a doubled celerity doubles its boundary weight") {
    Eigen::VectorXd pi(2);
    pi << 0.5, 0.5;
    const auto ps = pi_star(pi, {1.0, 2.0});
    CHECK(ps(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(ps(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("weighted case") {
    Eigen::VectorXd pi(2);
    pi << 2.0 / 3.0, 1.0 / 3.0;
    const auto ps = pi_star(pi, {3.0, 1.0});
    CHECK(ps(0) == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
    CHECK(ps(1) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  }
  SUBCASE("normalization and positivity") {
    Eigen::VectorXd pi(4);
    pi << 0.1, 0.2, 0.3, 0.4;
    const auto ps = pi_star(pi, {0.5, 1.0, 1.5, 2.0});
    CHECK(ps.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((ps.array() > 0.0).all());
  }
}

TEST_CASE("single environment: deterministic motion and quadrature hit times") {
  auto spec = single_env_spec();
  RngStream rng(1, 0);
  const auto res = simulate_if(spec, 2.0, rng, 0, 0.0);
  REQUIRE(res.events.size() >= 3);
  // First hit from 0.5 at slope 2: t = (1 - 0.5) / 2.
  CHECK(res.events[0].hit_time == doctest::Approx(0.25).epsilon(1e-9));
  // Later hits: (1 - reset) / 2 after the previous hit.
  for (std::size_t k = 1; k < res.events.size(); ++k) {
    const double expected =
        res.events[k - 1].hit_time + (1.0 - res.events[k - 1].reset_value) / 2.0;
    CHECK(res.events[k].hit_time == doctest::Approx(expected).epsilon(1e-9));
  }
  for (const auto& e : res.events) CHECK(e.env_at_hit == 0);
}

TEST_CASE("hit-to-hit intervals follow the rescaled reset law exactly") {
  // Unit flow factor, constant celerity a: the interval after a reset to xi
  // equals (threshold - xi) / a, an exact pathwise identity; with resets
  // uniform on (0.2, 0.4) the intervals are uniform on (0.3, 0.4).
  auto spec = single_env_spec();
  RngStream rng(2, 0);
  const auto res = simulate_if(spec, 2000.0, rng);
  REQUIRE(res.events.size() >= 1000);
  std::vector<double> intervals;
  for (std::size_t k = 1; k < res.events.size(); ++k) {
    const double interval = res.events[k].hit_time - res.events[k - 1].hit_time;
    CHECK(interval == doctest::Approx((1.0 - res.events[k - 1].reset_value) / 2.0)
                          .epsilon(1e-9));
    intervals.push_back(interval);
  }
  CHECK(stats::ks_one_sample_p(intervals, [](double v) {
          if (v <= 0.3) return 0.0;
          if (v >= 0.4) return 1.0;
          return (v - 0.3) / 0.1;
        }) > 0.01);
}

TEST_CASE("nonlinear flow factor: hit times equal the exact quadrature") {
  // x' = a (1 + x): time from x0 to the threshold is log((1+c)/(1+x0)) / a.
  IFSpec spec;
  spec.env = RateMatrix::single_state();
  spec.celerity = {1.5};
  spec.flow_factor = [](double x) { return 1.0 + x; };
  spec.floor = 0.0;
  spec.threshold = 1.0;
  spec.reset = {point_reset(0.25)};
  spec.initial_law = [](RngStream&) { return 0.25; };
  RngStream rng(30, 0);
  const auto res = simulate_if(spec, 3.0, rng);
  REQUIRE(res.events.size() >= 2);
  const double expected = std::log(2.0 / 1.25) / 1.5;
  CHECK(res.events[0].hit_time == doctest::Approx(expected).epsilon(1e-8));
  CHECK(res.events[1].hit_time - res.events[0].hit_time ==
        doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("integrability advisory") {
  SUBCASE("a unit flow factor is clearly integrable") {
    const auto rep = flow_integrability_advisory(default_instance(1.0));
    CHECK_FALSE(rep.suspected_divergent);
    CHECK(rep.integral.back() == doctest::Approx(1.0).epsilon(0.01));
  }
  SUBCASE("a factor vanishing linearly at the threshold is flagged") {
    IFSpec spec = default_instance(1.0);
    spec.flow_factor = [](double x) { return std::max(1e-12, 1.0 - x); };
    const auto rep = flow_integrability_advisory(spec);
    CHECK(rep.suspected_divergent);
  }
  SUBCASE("an inverse square root edge stays integrable") {
    IFSpec spec = default_instance(1.0);
    spec.flow_factor = [](double x) { return 1.0 / std::sqrt(std::max(1e-12, 1.0 - x)); };
    const auto rep = flow_integrability_advisory(spec);
    CHECK_FALSE(rep.suspected_divergent);
  }
}

TEST_CASE("averaged description bundles the limit ingredients") {
  const auto avg = averaged_spec(default_instance(1e-3));
  CHECK(avg.mean_celerity == doctest::Approx(0.75));
  CHECK(avg.boundary_law.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(avg.boundary_law(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(static_cast<bool>(avg.mixture.cdf));
  CHECK(avg.mixture.cdf(0.5) == doctest::Approx(1.0));
}

TEST_CASE("structural guarantees on every run") {
  auto spec = default_instance(0.05);
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    RngStream rng(3, rep);
    const auto res = simulate_if(spec, 30.0, rng);
    res.trajectory.validate();
    double prev = -1.0;
    for (const auto& e : res.events) {
      CHECK(e.hit_time > prev);
      prev = e.hit_time;
      CHECK(e.reset_value > spec.floor);
      CHECK(e.reset_value < spec.threshold);
    }
    CHECK(std::isfinite(static_cast<double>(res.events.size())));
  }
}

TEST_CASE("piecewise linear trajectory slopes alternate with the environment") {
  auto spec = default_instance(1.0);
  RngStream rng(4, 1);
  const auto res = simulate_if(spec, 6.0, rng, 0, 0.01);
  const auto& traj = res.trajectory;
  REQUIRE(traj.times.size() > 100);
  // Between consecutive samples with no event in between, the secant slope
  // equals the active celerity.
  std::size_t checked = 0;
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double t0 = traj.times[i - 1], t1 = traj.times[i];
    bool clean = t1 - t0 > 1e-6;
    for (const auto& e : traj.events)
      if (e.t > t0 && e.t <= t1) clean = false;
    if (!clean) continue;
    const double slope = (traj.states[i](0) - traj.states[i - 1](0)) / (t1 - t0);
    const double expected = spec.celerity[traj.env[i - 1]];
    CHECK(slope == doctest::Approx(expected).epsilon(1e-6));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("constant celerity kills the time-scale dependence") {
  // With a single celerity value the law of the hit times cannot depend on
  // epsilon.
  auto base = default_instance(1.0);
  base.celerity = {1.0, 1.0};
  auto collect = [&](double eps, std::uint64_t seed) {
    IFSpec spec = base;
    spec.epsilon = eps;
    std::vector<double> first;
    for (std::uint64_t rep = 0; rep < 4000; ++rep) {
      RngStream rng(seed, rep);
      const auto res = simulate_if(spec, 10.0, rng, 1);
      REQUIRE_FALSE(res.events.empty());
      first.push_back(res.events[0].hit_time);
    }
    return first;
  };
  const auto at_1 = collect(1.0, 5);
  const auto at_01 = collect(0.1, 6);
  const auto at_001 = collect(0.01, 7);
  CHECK(stats::ks_two_sample_p(at_1, at_01) > 0.01);
  CHECK(stats::ks_two_sample_p(at_1, at_001) > 0.01);
}

TEST_CASE("averaged flow of the piecewise linear instance has slope 3/4") {
  auto spec = default_instance(0.01);
  CHECK(averaged_celerity(spec) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(averaged_flow(spec, 0.25, 0.5) == doctest::Approx(0.25 + 0.75 * 0.5)
                                              .epsilon(1e-9));
  CHECK(averaged_hit_time(spec, 0.25) == doctest::Approx(0.75 / 0.75).epsilon(1e-8));
}

TEST_CASE("boundary histogram approaches the celerity-biased law") {
  auto spec = default_instance(1e-3);
  const auto batch = first_hit_batch(spec, 4000, 8);
  std::vector<IFEvent> events;
  for (std::size_t i = 0; i < batch.env_at_hit.size(); ++i)
    events.push_back({0.0, batch.env_at_hit[i], batch.reset_values[i]});
  const auto hist = boundary_celerity_histogram(events, 2);
  const double tv =
      stats::total_variation(hist, {1.0 / 3.0, 2.0 / 3.0});
  CHECK(tv <= 0.03);
}

TEST_CASE("without acceleration the slow start biases the first hit") {
  auto spec = default_instance(1.0);
  const auto batch = first_hit_batch(spec, 4000, 9);
  std::vector<IFEvent> events;
  for (std::size_t i = 0; i < batch.env_at_hit.size(); ++i)
    events.push_back({0.0, batch.env_at_hit[i], batch.reset_values[i]});
  const auto hist = boundary_celerity_histogram(events, 2);
  const double tv = stats::total_variation(hist, {1.0 / 3.0, 2.0 / 3.0});
  CHECK(tv > 0.04);  // visibly away from the limit law
}

TEST_CASE("averaged jump measure") {
  SUBCASE("identical reset measures are unaffected by the weights") {
    auto spec = default_instance(0.5);
    const auto mix = averaged_jump_measure(spec);
    RngStream rng(10, 0);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = mix.sample(rng);
    CHECK(stats::ks_one_sample_p(xs, [](double v) {
            if (v <= 0.0) return 0.0;
            if (v >= 0.5) return 1.0;
            return 2.0 * v;
          }) > 0.01);
  }
  SUBCASE("point resets recover the boundary law as frequencies") {
    auto spec = default_instance(1e-3);
    spec.reset = {point_reset(0.2), point_reset(0.4)};
    const auto batch = first_hit_batch(spec, 6000, 11);
    int low = 0;
    for (double v : batch.reset_values)
      if (v < 0.3) ++low;
    const double p_low = static_cast<double>(low) / batch.reset_values.size();
    CHECK(std::fabs(p_low - 1.0 / 3.0) < 0.03);
  }
  SUBCASE("distinct uniform resets mix with the boundary weights") {
    auto spec = default_instance(1e-3);
    spec.reset = {uniform_reset(0.0, 0.5), uniform_reset(0.5, 1.0)};
    const auto batch = first_hit_batch(spec, 10000, 12);
    const auto mix = averaged_jump_measure(spec);
    REQUIRE(static_cast<bool>(mix.cdf));
    CHECK(stats::ks_one_sample_p(batch.reset_values, mix.cdf) > 0.01);
  }
}

TEST_CASE("constant celerity yields flat noise-level columns") {
  // With a single celerity value the hit time is independent of the
  // environment; started from the stationary law, the hit-state histogram
  // sits at the noise floor for every epsilon and no trend is detectable.
  auto base = default_instance(1.0);
  base.celerity = {1.0, 1.0};
  base.initial_env_law = Eigen::Vector2d(0.5, 0.5);
  ConvergenceStudyOptions opt;
  opt.n_first_hits = 1600;
  opt.n_prehit_replicas = 16;
  opt.seed = 14;
  const auto study = convergence_study(base, {1.0, 0.1, 0.01}, opt);
  for (const auto& row : study.rows) CHECK(row.tv_pi_star < 0.05);
  CHECK(study.tv_trend_p > 0.05);
}

TEST_CASE("convergence study rows and trends") {
  auto spec = default_instance(1.0);
  ConvergenceStudyOptions opt;
  opt.n_first_hits = 2500;
  opt.n_prehit_replicas = 40;
  opt.seed = 13;
  const auto study = convergence_study(spec, {1.0, 0.1, 0.01}, opt);
  const auto& rows = study.rows;
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].epsilon == 1.0);
  // The boundary-law gap shrinks markedly from the unaccelerated regime.
  CHECK(rows[0].tv_pi_star > rows[2].tv_pi_star);
  // The pre-hit deviation from the averaged flow decreases with epsilon.
  CHECK(rows[0].sup_dist_prehit > rows[1].sup_dist_prehit);
  CHECK(rows[1].sup_dist_prehit > rows[2].sup_dist_prehit);
  // Trend verdicts resolve decisively on this schedule.
  CHECK(study.tv_trend_p < 0.05);
  CHECK(study.sup_trend_p < 0.05);
  // The shared reset measure keeps the KS column at the noise floor.
  for (const auto& row : rows) CHECK(row.ks_mu_bar < 0.05);
}

TEST_CASE("input validation") {
  auto spec = default_instance(1.0);
  spec.celerity = {0.5};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = default_instance(1.0);
  spec.epsilon = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = default_instance(1.0);
  spec.celerity = {0.5, -1.0};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  CHECK_THROWS_AS(boundary_celerity_histogram({}, 2), std::invalid_argument);
}
