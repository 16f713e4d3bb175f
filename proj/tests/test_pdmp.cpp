#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pdmplab/pdmp.hpp"
#include "pdmplab/stats.hpp"
#include "pdmplab/switched.hpp"

using namespace pdmplab;

namespace {

SwitchedSystem single_env_system(VectorField f) {
  std::vector<VectorField> fields;
  fields.push_back(std::move(f));
  return SwitchedSystem(std::move(fields), RateMatrix::single_state());
}

}  // namespace

TEST_CASE("no jumps configured reduces to the pure flow") {
  auto sys = single_env_system(scalar_growth_field(0.5));
  RngStream rng(1, 0);
  PdmpOptions opt;
  opt.record_dt = 0.5;
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const auto traj = simulate_pdmp(sys, x0, 0, 4.0, rng, nullptr, nullptr, opt);
  traj.validate();
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double exact = std::exp(0.5 * traj.times[i]);
    CHECK(std::fabs(traj.states[i](0) - exact) / exact < 1e-8);
  }
  CHECK(traj.events.empty());
}

TEST_CASE("scalar growth through the engine matches the environment-path formula") {
  // X_t = X_0 exp(int a(env)) computed from the very same environment path.
  const auto q = RateMatrix::two_state(1.0, 2.0);
  const std::vector<double> a{1.0, -1.0};
  switched::MalthusModel model(q, a, 1.0);
  auto sys = model.to_system();
  for (std::uint64_t rep = 0; rep < 5; ++rep) {
    RngStream rng_engine(77, rep), rng_path(77, rep);
    const double horizon = 8.0;
    Eigen::VectorXd x0(1);
    x0 << 1.0;
    const auto traj = simulate_pdmp(sys, x0, 0, horizon, rng_engine);
    // simulate_pdmp draws the environment path first from the same stream.
    const auto path = simulate_ctmc(q, 0, horizon, rng_path);
    const double exact = std::exp(integrate_along(path, a));
    const double got = traj.states.back()(0);
    CHECK(std::fabs(got - exact) / exact < 1e-8);
  }
}

TEST_CASE("constant-rate jumps with a frozen state are a Poisson process") {
  auto sys = single_env_system(zero_field(1));
  const double lambda = 1.3, horizon = 4.0;
  JumpSpec jumps;
  jumps.rate = [lambda](const Eigen::VectorXd&, int) { return lambda; };
  jumps.majorant = lambda;
  jumps.transition = [](const Eigen::VectorXd& x, int, RngStream&) { return x; };

  const int n_rep = 10000;
  std::vector<std::uint32_t> counts(n_rep);
  for (int rep = 0; rep < n_rep; ++rep) {
    RngStream rng(123, static_cast<std::uint64_t>(rep));
    const auto traj =
        simulate_pdmp(sys, Eigen::VectorXd::Zero(1), 0, horizon, rng, &jumps);
    std::uint32_t n = 0;
    for (const auto& e : traj.events)
      if (e.tag == EventTag::SpontaneousJump) ++n;
    counts[rep] = n;
  }
  CHECK(stats::poisson_gof_p(counts, lambda * horizon) > 0.01);
}

TEST_CASE("thinning reproduces a state-dependent intensity along a known flow") {
  // x' = 1 from 0, rate(x) = x: expected jumps in [k, k+1] equal k + 1/2.
  auto sys = single_env_system(constant_field(Eigen::VectorXd::Ones(1)));
  const double horizon = 4.0;
  JumpSpec jumps;
  jumps.rate = [](const Eigen::VectorXd& x, int) { return x(0); };
  jumps.majorant = horizon;
  jumps.transition = [](const Eigen::VectorXd& x, int, RngStream&) { return x; };

  const int n_rep = 4000;
  std::vector<std::vector<double>> window_counts(4, std::vector<double>(n_rep, 0.0));
  for (int rep = 0; rep < n_rep; ++rep) {
    RngStream rng(321, static_cast<std::uint64_t>(rep));
    const auto traj =
        simulate_pdmp(sys, Eigen::VectorXd::Zero(1), 0, horizon, rng, &jumps);
    for (const auto& e : traj.events)
      if (e.tag == EventTag::SpontaneousJump)
        window_counts[static_cast<int>(e.t)][rep] += 1.0;
  }
  for (int w = 0; w < 4; ++w) {
    const auto s = stats::summarize(window_counts[w]);
    const double expected = w + 0.5;
    CHECK(std::fabs(s.mean - expected) < 3.0 * s.se);
  }
}

TEST_CASE("a violated majorant is a hard error naming the state") {
  auto sys = single_env_system(constant_field(Eigen::VectorXd::Ones(1)));
  JumpSpec jumps;
  jumps.rate = [](const Eigen::VectorXd& x, int) { return x(0); };
  jumps.majorant = 0.5;  // exceeded once x > 1/2
  jumps.transition = [](const Eigen::VectorXd& x, int, RngStream&) { return x; };
  RngStream rng(5, 5);
  CHECK_THROWS_WITH_AS(
      simulate_pdmp(sys, Eigen::VectorXd::Zero(1), 0, 10.0, rng, &jumps),
      doctest::Contains("majorant"), std::runtime_error);
}

TEST_CASE("missing majorant is a configuration error") {
  auto sys = single_env_system(zero_field(1));
  JumpSpec jumps;
  jumps.rate = [](const Eigen::VectorXd&, int) { return 1.0; };
  jumps.majorant = 0.0;
  jumps.transition = [](const Eigen::VectorXd& x, int, RngStream&) { return x; };
  RngStream rng(5, 5);
  CHECK_THROWS_AS(simulate_pdmp(sys, Eigen::VectorXd::Zero(1), 0, 1.0, rng, &jumps),
                  std::invalid_argument);
}

TEST_CASE("boundary hits alternate with resets and stay ordered") {
  auto sys = single_env_system(constant_field(Eigen::VectorXd::Ones(1)));
  BoundarySpec boundary;
  boundary.functional = [](const Eigen::VectorXd& x) { return x(0) - 1.0; };
  boundary.reset = [](const Eigen::VectorXd&, int, RngStream& rng) {
    Eigen::VectorXd y(1);
    y << rng.uniform(0.0, 0.5);
    return y;
  };
  RngStream rng(9, 2);
  const auto traj = simulate_pdmp(sys, Eigen::VectorXd::Zero(1), 0, 10.0, rng,
                                  nullptr, &boundary);
  traj.validate();
  int hits = 0;
  for (const auto& e : traj.events)
    if (e.tag == EventTag::BoundaryHit) ++hits;
  CHECK(hits >= 9);  // slope 1, resets below 1/2: at least ~10 hits in 10 units
}

TEST_CASE("byte-identical trajectories for identical seeds") {
  auto make = [&](std::uint64_t seed, std::uint64_t stream) {
    auto sys = switched::canonical_planar(2.0).to_system();
    RngStream rng(seed, stream);
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.0;
    PdmpOptions opt;
    opt.record_dt = 0.25;
    return simulate_pdmp(sys, x0, 0, 10.0, rng, nullptr, nullptr, opt);
  };
  CHECK(make(42, 3) == make(42, 3));
  CHECK_FALSE(make(42, 3) == make(42, 4));
}

TEST_CASE("replica map is deterministic under any thread count") {
  auto worker = [](std::size_t, RngStream& rng) {
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) acc += rng.uniform01();
    return acc;
  };
  const auto serial = replica_map<double>(7, 64, worker, 1);
  const auto parallel = replica_map<double>(7, 64, worker, 8);
  CHECK(serial == parallel);
}
