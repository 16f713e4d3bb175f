#include "pdmplab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pdmplab::stats {

double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double pairwise_sum(const double* xs, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs, half) + pairwise_sum(xs + half, n - half);
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = pairwise_sum(xs) / static_cast<double>(s.n);
  if (s.n == 1) return s;
  double acc = 0.0, comp = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    const double y = d * d - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  s.var = acc / static_cast<double>(s.n - 1);
  s.se = std::sqrt(s.var / static_cast<double>(s.n));
  return s;
}

double t_quantile_975(std::size_t df) {
  static const double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) return 12.706;
  if (df <= 30) return table[df - 1];
  if (df <= 60) return 2.0;
  return 1.96;
}

MeanCI mean_ci95(const std::vector<double>& xs) {
  const Summary s = summarize(xs);
  const double half = (s.n > 1) ? t_quantile_975(s.n - 1) * s.se : 0.0;
  return MeanCI{s.mean, s.se, s.mean - half, s.mean + half, s.n};
}

double z_score(double mean_a, double se_a, double mean_b, double se_b) {
  const double denom = std::sqrt(se_a * se_a + se_b * se_b);
  if (denom == 0.0) return (mean_a == mean_b) ? 0.0 : INFINITY;
  return (mean_a - mean_b) / denom;
}

namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), valid for x >= a + 1 (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double chi2, double dof) {
  return gamma_q(dof / 2.0, chi2 / 2.0);
}

double chi_square_gof_p(const std::vector<double>& observed,
                        const std::vector<double>& expected,
                        double min_expected, int fitted_params) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof_p: size mismatch");
  // Pool sparse bins leftward, keeping bin order.
  std::vector<double> obs, exp;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs.empty()) {
      obs.push_back(o_acc);
      exp.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      exp.back() += e_acc;
    }
  }
  if (obs.size() < 2) return 1.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - exp[i];
    chi2 += d * d / exp[i];
  }
  const double dof =
      static_cast<double>(obs.size()) - 1.0 - static_cast<double>(fitted_params);
  if (dof < 1.0) return 1.0;
  return chi_square_sf(chi2, dof);
}

double ks_asymptotic_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample_p: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0, fa = 0.0, fb = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    fa = static_cast<double>(i) / na;
    fb = static_cast<double>(j) / nb;
    d = std::max(d, std::fabs(fa - fb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return ks_asymptotic_sf((ne + 0.12 + 0.11 / ne) * d);
}

double ks_one_sample_stat(std::vector<double> xs,
                          const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_one_sample_p(std::vector<double> xs,
                       const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(xs.size());
  const double d = ks_one_sample_stat(std::move(xs), cdf);
  const double ne = std::sqrt(n);
  return ks_asymptotic_sf((ne + 0.12 + 0.11 / ne) * d);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

namespace {

double jt_statistic(const std::vector<std::vector<double>>& groups) {
  // Counts pairs (earlier group value > later group value); ties count 1/2.
  double u = 0.0;
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
    for (std::size_t h = g + 1; h < groups.size(); ++h) {
      for (double a : groups[g]) {
        for (double b : groups[h]) {
          if (a > b)
            u += 1.0;
          else if (a == b)
            u += 0.5;
        }
      }
    }
  }
  return u;
}

}  // namespace

double decreasing_trend_p(const std::vector<std::vector<double>>& groups,
                          RngStream& rng, int n_perm) {
  if (groups.size() < 2)
    throw std::invalid_argument("decreasing_trend_p: need >= 2 groups");
  const double observed = jt_statistic(groups);
  std::vector<double> pool;
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) {
    sizes.push_back(g.size());
    pool.insert(pool.end(), g.begin(), g.end());
  }
  int hits = 0;
  std::vector<std::vector<double>> shuffled(groups.size());
  for (int p = 0; p < n_perm; ++p) {
    for (std::size_t i = pool.size(); i > 1; --i)
      std::swap(pool[i - 1], pool[rng.uniform_below(i)]);
    std::size_t off = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
      shuffled[g].assign(pool.begin() + off, pool.begin() + off + sizes[g]);
      off += sizes[g];
    }
    if (jt_statistic(shuffled) >= observed) ++hits;
  }
  return (1.0 + hits) / (1.0 + n_perm);
}

double poisson_pmf(unsigned k, double mean) {
  if (mean <= 0.0) return (k == 0) ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double poisson_gof_p(const std::vector<std::uint32_t>& samples, double mean) {
  if (samples.empty()) throw std::invalid_argument("poisson_gof_p: empty sample");
  const std::uint32_t k_max = *std::max_element(samples.begin(), samples.end());
  std::vector<double> observed(k_max + 2, 0.0);
  for (auto k : samples) observed[k] += 1.0;
  const double n = static_cast<double>(samples.size());
  std::vector<double> expected(k_max + 2, 0.0);
  double tail = 1.0;
  for (std::uint32_t k = 0; k <= k_max; ++k) {
    expected[k] = n * poisson_pmf(k, mean);
    tail -= poisson_pmf(k, mean);
  }
  expected[k_max + 1] = n * std::max(tail, 0.0);
  return chi_square_gof_p(observed, expected);
}

}  // namespace pdmplab::stats
