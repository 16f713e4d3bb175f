#include "pdmplab/switched.hpp"

#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace pdmplab::switched {

namespace {

Eigen::MatrixXd tilted_generator(const RateMatrix& q, const std::vector<double>& a,
                                 double p) {
  if (static_cast<int>(a.size()) != q.size())
    throw std::invalid_argument("growth rates must index the environment states");
  Eigen::MatrixXd m = q.q();
  for (int i = 0; i < q.size(); ++i) m(i, i) += p * a[i];
  return m;
}

}  // namespace

MalthusModel::MalthusModel(RateMatrix env_, std::vector<double> growth_, double x0_)
    : env(std::move(env_)), growth(std::move(growth_)), x0(x0_) {
  if (static_cast<int>(growth.size()) != env.size())
    throw std::invalid_argument("MalthusModel: growth rates must index env states");
  if (x0 <= 0.0) throw std::invalid_argument("MalthusModel: x0 must be > 0");
}

SwitchedSystem MalthusModel::to_system() const {
  std::vector<VectorField> fields;
  fields.reserve(growth.size());
  for (double a : growth) fields.push_back(scalar_growth_field(a));
  return SwitchedSystem(std::move(fields), env, StateSpace::positive_orthant());
}

PerronMoment moment_growth_rate(const RateMatrix& q, const std::vector<double>& a,
                                double p) {
  if (p < 0.0) throw std::invalid_argument("moment_growth_rate: p must be >= 0");
  if (!q.irreducible())
    throw std::invalid_argument(
        "moment_growth_rate: generator must be irreducible (unique dominant root)");
  const Eigen::MatrixXd m = tilted_generator(q, a, p);
  // Left eigenvectors of m are right eigenvectors of m^T.
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.transpose());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("moment_growth_rate: eigensolver failed");
  const auto& vals = es.eigenvalues();
  int top = 0;
  for (int i = 1; i < vals.size(); ++i)
    if (vals(i).real() > vals(top).real()) top = i;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (std::fabs(vals(top).imag()) > 1e-9 * scale)
    throw std::runtime_error("moment_growth_rate: dominant root not real");
  for (int i = 0; i < vals.size(); ++i)
    if (i != top && vals(i).real() > vals(top).real() - 1e-12 * scale &&
        std::fabs(vals(i).imag()) <= 1e-9 * scale)
      throw std::runtime_error("moment_growth_rate: dominant root not simple");

  Eigen::VectorXcd vc = es.eigenvectors().col(top);
  // Rotate to the real axis and normalize to sum one.
  int imax = 0;
  for (int i = 1; i < vc.size(); ++i)
    if (std::abs(vc(i)) > std::abs(vc(imax))) imax = i;
  vc /= vc(imax);
  Eigen::VectorXd v(vc.size());
  for (int i = 0; i < vc.size(); ++i) {
    if (std::fabs(vc(i).imag()) > 1e-8)
      throw std::runtime_error("moment_growth_rate: dominant eigenvector not real");
    v(i) = vc(i).real();
  }
  if (!((v.array() > 0.0).all() || (v.array() < 0.0).all()))
    throw std::runtime_error("moment_growth_rate: dominant eigenvector not positive");
  v /= v.sum();
  return PerronMoment{vals(top).real(), v};
}

double stationary_average(const RateMatrix& q, const std::vector<double>& a) {
  const Eigen::VectorXd nu = q.stationary_distribution();
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i) s += nu(i) * a[i];
  return s;
}

double moment_feynman_kac(const RateMatrix& q, const std::vector<double>& a,
                          double p, double t, const Eigen::VectorXd& mu0) {
  if (t < 0.0) throw std::invalid_argument("moment_feynman_kac: t must be >= 0");
  if (mu0.size() != q.size())
    throw std::invalid_argument("moment_feynman_kac: initial law size mismatch");
  const Eigen::MatrixXd m = tilted_generator(q, a, p);
  const Eigen::MatrixXd e = (t * m).exp();
  return mu0.transpose() * e * Eigen::VectorXd::Ones(q.size());
}

stats::Summary feynman_kac_mc(const RateMatrix& q, const std::vector<double>& a,
                              double p, double t, const Eigen::VectorXd& mu0,
                              std::size_t n_paths, std::uint64_t seed,
                              int n_threads) {
  std::vector<double> cum(q.size());
  double acc = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    acc += mu0(i);
    cum[i] = acc;
  }
  auto samples = replica_map<double>(
      seed, n_paths,
      [&](std::size_t, RngStream& rng) {
        const double u = rng.uniform01();
        int y0 = 0;
        while (y0 + 1 < q.size() && u > cum[y0]) ++y0;
        const CtmcPath path = simulate_ctmc(q, y0, t, rng);
        return std::exp(p * integrate_along(path, a));
      },
      n_threads);
  return stats::summarize(samples);
}

DichotomyReport moment_dichotomy(const RateMatrix& q, const std::vector<double>& a,
                                 double p_max, double critical_tol) {
  DichotomyReport rep{};
  rep.nu_a = stationary_average(q, a);
  rep.p_star = std::nan("");
  rep.window_hi = 0.0;
  rep.window_open = false;
  if (std::fabs(rep.nu_a) <= critical_tol) {
    rep.regime = DichotomyReport::Regime::Critical;
    return rep;
  }
  if (rep.nu_a > 0.0) {
    rep.regime = DichotomyReport::Regime::MomentsDiverge;
    return rep;
  }
  rep.regime = DichotomyReport::Regime::MomentsDecay;
  auto lambda_at = [&](double p) { return moment_growth_rate(q, a, p).lambda; };
  // lambda_p is convex with lambda_0 = 0 and negative slope at 0, so it is
  // negative up to a single crossing.
  if (lambda_at(p_max) < 0.0) {
    rep.window_hi = p_max;
    rep.window_open = true;
    rep.p_star = 0.5 * p_max;
    return rep;
  }
  double lo = 0.0, hi = p_max;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * p_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (lambda_at(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  rep.window_hi = lo;
  rep.p_star = 0.5 * lo;
  return rep;
}

double derivative_check(const RateMatrix& q, const std::vector<double>& a) {
  const double h = 1e-5;
  // lambda_p extends smoothly to small negative p (same dominant-root
  // formula), so the central difference straddles zero.
  auto lambda_at = [&](double p) {
    const Eigen::MatrixXd m = tilted_generator(q, a, p);
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    double best = -INFINITY;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      best = std::max(best, es.eigenvalues()(i).real());
    return best;
  };
  const double fd = (lambda_at(h) - lambda_at(-h)) / (2.0 * h);
  return std::fabs(fd - stationary_average(q, a));
}

GrowthRateCurve growth_rate_curve(const RateMatrix& q, const std::vector<double>& a,
                                  const std::vector<double>& p_grid) {
  GrowthRateCurve curve;
  curve.p = p_grid;
  curve.lambda.reserve(p_grid.size());
  for (double p : p_grid) curve.lambda.push_back(moment_growth_rate(q, a, p).lambda);
  const double h = 1e-5;
  curve.derivative_at_zero =
      (moment_growth_rate(q, a, h).lambda - moment_growth_rate(q, a, 0.0).lambda) / h;
  return curve;
}

// ---------------------------------------------------------------------------

LinearSwitchedSystem::LinearSwitchedSystem(std::vector<Eigen::MatrixXd> mats_,
                                           RateMatrix env_)
    : mats(std::move(mats_)), env(std::move(env_)) {
  if (mats.empty()) throw std::invalid_argument("LinearSwitchedSystem: no matrices");
  if (static_cast<int>(mats.size()) != env.size())
    throw std::invalid_argument("LinearSwitchedSystem: env states must index matrices");
  for (const auto& m : mats)
    if (m.rows() != mats.front().rows() || m.cols() != m.rows())
      throw std::invalid_argument("LinearSwitchedSystem: inconsistent matrix shapes");
}

SwitchedSystem LinearSwitchedSystem::to_system() const {
  std::vector<VectorField> fields;
  fields.reserve(mats.size());
  for (const auto& m : mats) fields.push_back(linear_field(m));
  return SwitchedSystem(std::move(fields), env);
}

Eigen::Matrix2d planar_matrix_0() {
  Eigen::Matrix2d m;
  m << -1.0, 4.0, -0.25, -1.0;
  return m;
}

Eigen::Matrix2d planar_matrix_1() {
  Eigen::Matrix2d m;
  m << -1.0, -0.25, 4.0, -1.0;
  return m;
}

LinearSwitchedSystem canonical_planar(double switch_rate) {
  if (switch_rate <= 0.0)
    throw std::invalid_argument("canonical_planar: switching rate must be > 0");
  return LinearSwitchedSystem({planar_matrix_0(), planar_matrix_1()},
                              RateMatrix::symmetric_two_state(switch_rate));
}

Eigen::Vector2d planar_closed_form(double x0, double y0, double t) {
  const double decay = std::exp(-t);
  const double c = std::cos(t), s = std::sin(t);
  return Eigen::Vector2d(decay * (c * x0 - s * y0 / 4.0),
                         decay * (4.0 * s * x0 + c * y0));
}

LyapunovEstimate lyapunov_exponent(const LinearSwitchedSystem& sys,
                                   double horizon, std::uint64_t seed, int n_rep,
                                   const LyapunovOptions& opt) {
  if (horizon <= 0.0 || n_rep < 2)
    throw std::invalid_argument("lyapunov_exponent: need horizon > 0 and n_rep >= 2");
  const int dim = sys.dimension();
  const auto chis = replica_map<double>(
      seed, static_cast<std::size_t>(n_rep),
      [&](std::size_t, RngStream& rng) {
        // Linear flows between events propagate exactly through the matrix
        // exponential; one propagator per environment segment (split at the
        // renormalization grid) replaces per-step integration.
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        x(0) = 1.0;
        int env = static_cast<int>(rng.uniform_below(sys.env.size()));
        CtmcStream env_stream(sys.env, env, rng);

        double t = 0.0;
        double next_renorm = opt.renorm_dt;
        double log_acc = 0.0, log_comp = 0.0;  // compensated log-norm sum
        auto add_log = [&](double v) {
          const double y = v - log_comp;
          const double s = log_acc + y;
          log_comp = (s - log_acc) - y;
          log_acc = s;
        };
        bool need_segment = true;
        double seg_end = 0.0;
        while (t < horizon) {
          if (need_segment) {
            env = env_stream.state();
            seg_end = t + env_stream.advance();
            need_segment = false;
          }
          const double until = std::min({seg_end, next_renorm, horizon});
          const double span = until - t;
          if (span > 0.0) x = (span * sys.mats[env]).exp() * x;
          t = until;
          if (t >= seg_end) need_segment = true;
          if (t >= next_renorm || t >= horizon) {
            const double n = x.norm();
            add_log(std::log(n));
            x /= n;
            while (next_renorm <= t) next_renorm += opt.renorm_dt;
          }
        }
        return log_acc / horizon;
      },
      opt.n_threads);

  const stats::MeanCI ci = stats::mean_ci95(chis);
  LyapunovEstimate est;
  est.chi = ci.mean;
  est.se = ci.se;
  est.ci_lo = ci.lo;
  est.ci_hi = ci.hi;
  est.horizon = horizon;
  est.n_rep = n_rep;
  est.horizon_warning =
      opt.ci_width_request > 0.0 && (ci.hi - ci.lo) > opt.ci_width_request;
  return est;
}

namespace {

// Sign of chi, statistically resolved; doubles the horizon until the CI
// excludes zero or the cap is reached.
int resolved_sign(const std::function<LinearSwitchedSystem(double)>& make_system,
                  double rate, const CriticalRateOptions& opt,
                  std::uint64_t seed_salt, LyapunovEstimate* out) {
  double horizon = opt.base_horizon;
  for (;;) {
    const LyapunovEstimate est = lyapunov_exponent(
        make_system(rate), horizon, opt.seed ^ mix64(seed_salt), opt.n_rep,
        opt.lyapunov);
    if (est.ci_excludes_zero()) {
      if (out) *out = est;
      return est.chi > 0.0 ? 1 : -1;
    }
    horizon *= 2.0;
    if (horizon > opt.horizon_cap)
      throw std::runtime_error(
          "critical_rate: sign of the exponent not statistically resolved at rate " +
          std::to_string(rate) + "; a longer horizon (or wider bracket) is needed");
  }
}

}  // namespace

CriticalRateResult critical_rate(
    const std::function<LinearSwitchedSystem(double)>& make_system,
    double rate_lo, double rate_hi, double tol, const CriticalRateOptions& opt) {
  if (!(rate_lo > 0.0 && rate_hi > rate_lo && tol > 0.0))
    throw std::invalid_argument("critical_rate: need 0 < lo < hi and tol > 0");
  LyapunovEstimate est_lo, est_hi;
  if (resolved_sign(make_system, rate_lo, opt, 1, &est_lo) != -1)
    throw std::invalid_argument(
        "critical_rate: exponent at the lower bracket end is not negative");
  if (resolved_sign(make_system, rate_hi, opt, 2, &est_hi) != 1)
    throw std::invalid_argument(
        "critical_rate: exponent at the upper bracket end is not positive");
  double lo = rate_lo, hi = rate_hi;
  std::uint64_t salt = 3;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    LyapunovEstimate est_mid;
    if (resolved_sign(make_system, mid, opt, salt++, &est_mid) == 1) {
      hi = mid;
      est_hi = est_mid;
    } else {
      lo = mid;
      est_lo = est_mid;
    }
  }
  return CriticalRateResult{lo, hi, est_lo, est_hi};
}

// ---------------------------------------------------------------------------

double contraction_coefficient(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  return -es.eigenvalues().maxCoeff();
}

double contraction_coefficient_sampled(const VectorField& f,
                                       const Eigen::VectorXd& lo,
                                       const Eigen::VectorXd& hi, int n_pairs,
                                       RngStream& rng) {
  if (lo.size() != hi.size() || lo.size() != f.dimension)
    throw std::invalid_argument("contraction_coefficient_sampled: bad region");
  if ((hi - lo).maxCoeff() <= 0.0)
    throw std::invalid_argument("contraction_coefficient_sampled: degenerate region");
  Eigen::VectorXd x(f.dimension), y(f.dimension), fx(f.dimension), fy(f.dimension);
  double best = INFINITY;
  for (int k = 0; k < n_pairs; ++k) {
    for (int i = 0; i < f.dimension; ++i) {
      x(i) = rng.uniform(lo(i), hi(i));
      y(i) = rng.uniform(lo(i), hi(i));
    }
    const double d2 = (x - y).squaredNorm();
    if (d2 < 1e-20) continue;
    f.eval(x, fx);
    f.eval(y, fy);
    best = std::min(best, -(x - y).dot(fx - fy) / d2);
  }
  return best;
}

ContractionReport average_criterion(const std::vector<double>& rho,
                                    const Eigen::VectorXd& nu) {
  if (static_cast<int>(rho.size()) != nu.size())
    throw std::invalid_argument("average_criterion: size mismatch");
  if (std::fabs(nu.sum() - 1.0) > 1e-9 || (nu.array() < 0.0).any())
    throw std::invalid_argument("average_criterion: nu must be a probability vector");
  ContractionReport rep;
  rep.rho = rho;
  rep.nu = nu;
  rep.criterion = 0.0;
  for (int i = 0; i < nu.size(); ++i) rep.criterion += rho[i] * nu(i);
  rep.verdict = rep.criterion > 0.0;
  return rep;
}

CouplingPath two_point_coupling(const LinearSwitchedSystem& sys,
                                const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& x0_prime, double horizon,
                                double grid_dt, RngStream& rng,
                                const StepControl& ctrl) {
  if (grid_dt <= 0.0 || horizon <= 0.0)
    throw std::invalid_argument("two_point_coupling: need positive horizon and grid");
  std::vector<double> rho;
  rho.reserve(sys.mats.size());
  for (const auto& m : sys.mats) rho.push_back(contraction_coefficient(m));

  const int y0 = static_cast<int>(rng.uniform_below(sys.env.size()));
  const CtmcPath env_path = simulate_ctmc(sys.env, y0, horizon, rng);

  std::vector<VectorField> fields;
  for (const auto& m : sys.mats) fields.push_back(linear_field(m));
  std::vector<Rk4Stepper> steppers;
  for (const auto& f : fields) steppers.emplace_back(f);

  Eigen::VectorXd a = x0, b = x0_prime;
  const double d0 = (x0 - x0_prime).norm();
  double rho_integral = 0.0;

  CouplingPath path;
  auto record = [&](double t) {
    path.t.push_back(t);
    path.distance.push_back((a - b).norm());
    path.bound.push_back(d0 * std::exp(-rho_integral));
  };
  record(0.0);

  double next_grid = grid_dt;
  for (const auto& seg : env_path) {
    double t = seg.t_begin;
    Rk4Stepper& st = steppers[seg.state];
    while (t < seg.t_end) {
      const double until = std::min(seg.t_end, next_grid);
      double span = until - t;
      double advanced = 0.0;
      while (span - advanced > 1e-12 * std::max(1.0, span)) {
        const double h = std::min(ctrl.h, span - advanced);
        st.step(a, h);
        st.step(b, h);
        advanced += h;
      }
      rho_integral += rho[seg.state] * span;
      t = until;
      if (t >= next_grid) {
        record(t);
        next_grid += grid_dt;
      }
    }
  }
  if (path.t.back() < horizon) record(horizon);
  return path;
}

Eigen::VectorXd averaged_ode_limit(const SwitchedSystem& sys,
                                   const Eigen::VectorXd& nu,
                                   const Eigen::VectorXd& x0, double t,
                                   const StepControl& ctrl) {
  if (nu.size() != static_cast<int>(sys.fields.size()))
    throw std::invalid_argument("averaged_ode_limit: nu size mismatch");
  VectorField avg;
  avg.dimension = sys.dimension();
  const auto fields = sys.fields;  // owned copy for the closure
  avg.eval = [fields, nu](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out.setZero();
    Eigen::VectorXd tmp(x.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      fields[i].eval(x, tmp);
      out += nu(static_cast<int>(i)) * tmp;
    }
  };
  return integrate_flow(avg, x0, t, ctrl);
}

ProductChainResult product_chain(const std::function<double(RngStream&)>& theta,
                                 int n, double y0, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("product_chain: n must be >= 1");
  if (y0 <= 0.0) throw std::invalid_argument("product_chain: y0 must be > 0");
  ProductChainResult res;
  res.log_path.reserve(n + 1);
  res.log_path.push_back(std::log(y0));
  std::vector<double> logs;
  logs.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double th = theta(rng);
    if (!(th > 0.0))
      throw std::runtime_error("product_chain: sampled factor is not positive");
    logs.push_back(std::log(th));
    res.log_path.push_back(res.log_path.back() + logs.back());
  }
  res.mean_log_factor = stats::mean_ci95(logs);
  if (res.mean_log_factor.lo > 0.0)
    res.verdict = ProductChainResult::Verdict::Grows;
  else if (res.mean_log_factor.hi < 0.0)
    res.verdict = ProductChainResult::Verdict::Shrinks;
  else
    res.verdict = ProductChainResult::Verdict::Unresolved;
  return res;
}

}  // namespace pdmplab::switched
