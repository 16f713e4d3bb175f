#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pdmplab/rng.hpp"

namespace pdmplab::stats {

// Compensated (Kahan) and pairwise summation; both give results independent
// of thread scheduling when fed replica slots in index order.
double kahan_sum(const std::vector<double>& xs);
double pairwise_sum(const double* xs, std::size_t n);
inline double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum(xs.data(), xs.size());
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;   // unbiased sample variance
  double se = 0.0;    // standard error of the mean
};
Summary summarize(const std::vector<double>& xs);

struct MeanCI {
  double mean, se, lo, hi;
  std::size_t n;
  bool excludes_zero() const { return lo > 0.0 || hi < 0.0; }
};
// 95% t-interval for the mean of iid replicas.
MeanCI mean_ci95(const std::vector<double>& xs);
double t_quantile_975(std::size_t df);

// z-score between two independent Monte-Carlo estimates.
double z_score(double mean_a, double se_a, double mean_b, double se_b);

// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);
// Survival function of the chi-square law with `dof` degrees of freedom.
double chi_square_sf(double chi2, double dof);

// Chi-square goodness-of-fit p-value. Bins with expected count below
// `min_expected` are pooled into their left neighbor (the last bin pools
// rightward). `fitted_params` reduces the degrees of freedom.
double chi_square_gof_p(const std::vector<double>& observed,
                        const std::vector<double>& expected,
                        double min_expected = 5.0, int fitted_params = 0);

// Kolmogorov asymptotic survival function Q_KS(lambda).
double ks_asymptotic_sf(double lambda);
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);
double ks_one_sample_p(std::vector<double> xs,
                       const std::function<double(double)>& cdf);
double ks_one_sample_stat(std::vector<double> xs,
                          const std::function<double(double)>& cdf);

// Total variation distance between two finite distributions.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

// Permutation trend test (Jonckheere-Terpstra style): one-sided p-value for
// the alternative that values decrease along the group order. Groups hold
// replicate statistics measured under each ordered condition.
double decreasing_trend_p(const std::vector<std::vector<double>>& groups,
                          RngStream& rng, int n_perm = 20000);

// Poisson pmf, numerically stable for large means.
double poisson_pmf(unsigned k, double mean);

// Goodness of fit of integer samples against Poisson(mean).
double poisson_gof_p(const std::vector<std::uint32_t>& samples, double mean);

}  // namespace pdmplab::stats
