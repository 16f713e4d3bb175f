#include "pdmplab/gene.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace pdmplab::gene {

void GeneParams::validate() const {
  if (!(lambda1 > 0.0 && sigma1 > 0.0 && lambda2 >= 0.0))
    throw std::invalid_argument("GeneParams: rates must be positive");
  if (!(tau_r >= 0.0 && tau_r < tau_d))
    throw std::invalid_argument("GeneParams: need 0 <= tauR < tauD");
  if (!(v0 > 0.0)) throw std::invalid_argument("GeneParams: birth volume must be > 0");
}

bool MomentVector::coherent(double tol) const {
  if (var_m < -tol || var_p < -tol) return false;
  const double bound = std::sqrt(std::max(var_m, 0.0) * std::max(var_p, 0.0));
  return std::fabs(cov_mp) <= bound + tol;
}

double mrna_poisson_parameter(const GeneParams& p, double s) {
  p.validate();
  if (s < 0.0 || s >= p.tau_d)
    throw std::invalid_argument("mrna_poisson_parameter: phase outside [0, tauD)");
  const double ratio = p.lambda1 / p.sigma1;
  double x = 1.0 - std::exp(-(s + p.tau_d - p.tau_r) * p.sigma1) /
                       (2.0 - std::exp(-p.tau_d * p.sigma1));
  if (s >= p.tau_r) x += 1.0 - std::exp(-(s - p.tau_r) * p.sigma1);
  return ratio * x;
}

CycleMeanMap cycle_mean_map(const GeneParams& p) {
  p.validate();
  const double ratio = p.lambda1 / p.sigma1;
  const double e_pre = std::exp(-p.sigma1 * p.tau_r);
  const double e_post = std::exp(-p.sigma1 * (p.tau_d - p.tau_r));
  // Relaxation toward lambda1/sigma1 before replication, toward twice that
  // after, then the division halving.
  const double at_rep_offset = ratio * (1.0 - e_pre);
  const double at_div_offset = 2.0 * ratio * (1.0 - e_post) + at_rep_offset * e_post;
  CycleMeanMap map;
  map.slope = 0.5 * e_pre * e_post;
  map.offset = 0.5 * at_div_offset;
  return map;
}

double mean_profile(const GeneParams& p, double x_start, double s) {
  const double ratio = p.lambda1 / p.sigma1;
  if (s < p.tau_r)
    return ratio + (x_start - ratio) * std::exp(-p.sigma1 * s);
  const double at_rep = ratio + (x_start - ratio) * std::exp(-p.sigma1 * p.tau_r);
  const double doubled = 2.0 * ratio;
  return doubled + (at_rep - doubled) * std::exp(-p.sigma1 * (s - p.tau_r));
}

double protein_mean(const GeneParams& p, const MomentVector& m0, double s) {
  if (s < 0.0 || s >= p.tau_r)
    throw std::invalid_argument("protein_mean: phase must lie in [0, tauR)");
  const double ratio = p.lambda1 / p.sigma1;
  const double relax = (1.0 - std::exp(-p.sigma1 * s)) / p.sigma1;
  return m0.ep + p.lambda2 * (ratio * s + (m0.em - ratio) * relax);
}

double protein_variance(const GeneParams& p, const MomentVector& m0, double s) {
  if (s < 0.0 || s >= p.tau_r)
    throw std::invalid_argument("protein_variance: phase must lie in [0, tauR)");
  // Closed form for a Poisson transcript marginal at phase 0 (var_m = em);
  // derived by direct integration of the moment system.
  const double l2 = p.lambda2;
  const double s1 = p.sigma1;
  const double ratio = p.lambda1 / s1;
  const double delta = m0.em - ratio;
  const double e = std::exp(-s1 * s);
  const double relax = (1.0 - e) / s1;
  return m0.var_p + 2.0 * l2 * relax * m0.cov_mp +
         l2 * (ratio * s + delta * relax) +
         2.0 * l2 * l2 * ratio / s1 * (s - relax) +
         2.0 * l2 * l2 * delta * (1.0 - e * (1.0 + s1 * s)) / (s1 * s1);
}

namespace {

// Affine generator of the closed moment system on (em, ep, var_m, cov, var_p)
// augmented with a constant slot.
Eigen::Matrix<double, 6, 6> moment_generator(const GeneParams& p, double k) {
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
  const double s1 = p.sigma1, l2 = p.lambda2;
  a(0, 0) = -s1;
  a(0, 5) = k;
  a(1, 0) = l2;
  a(2, 0) = s1;
  a(2, 2) = -2.0 * s1;
  a(2, 5) = k;
  a(3, 2) = l2;
  a(3, 3) = -s1;
  a(4, 0) = l2;
  a(4, 3) = 2.0 * l2;
  return a;
}

Eigen::Matrix<double, 6, 6> division_matrix() {
  Eigen::Matrix<double, 6, 6> d = Eigen::Matrix<double, 6, 6>::Zero();
  d(0, 0) = 0.5;
  d(1, 1) = 0.5;
  d(2, 2) = 0.25;
  d(2, 0) = 0.25;
  d(3, 3) = 0.25;
  d(4, 4) = 0.25;
  d(4, 1) = 0.25;
  d(5, 5) = 1.0;
  return d;
}

Eigen::Matrix<double, 6, 1> to_vec(const MomentVector& m) {
  Eigen::Matrix<double, 6, 1> v;
  v << m.em, m.ep, m.var_m, m.cov_mp, m.var_p, 1.0;
  return v;
}

MomentVector from_vec(const Eigen::Matrix<double, 6, 1>& v) {
  MomentVector m;
  m.em = v(0);
  m.ep = v(1);
  m.var_m = v(2);
  m.cov_mp = v(3);
  m.var_p = v(4);
  return m;
}

// Propagates across [s0, s1] splitting at the replication instant.
MomentVector propagate_through(const GeneParams& p, const MomentVector& m0,
                               double s0, double s1) {
  MomentVector m = m0;
  if (s0 < p.tau_r && s1 > p.tau_r) {
    m = moment_ode_propagate(p, m, s0, p.tau_r, false);
    return moment_ode_propagate(p, m, p.tau_r, s1, true);
  }
  const bool doubled = s0 >= p.tau_r;
  return moment_ode_propagate(p, m, s0, s1, doubled);
}

}  // namespace

MomentVector moment_ode_propagate(const GeneParams& p, const MomentVector& m0,
                                  double s0, double s1, bool doubled) {
  p.validate();
  if (s1 < s0) throw std::invalid_argument("moment_ode_propagate: s1 < s0");
  if (s1 == s0) return m0;
  const double k = doubled ? 2.0 * p.lambda1 : p.lambda1;
  const Eigen::Matrix<double, 6, 6> prop =
      ((s1 - s0) * moment_generator(p, k)).exp();
  return from_vec(prop * to_vec(m0));
}

MomentVector division_map(const MomentVector& m) {
  MomentVector out;
  out.em = 0.5 * m.em;
  out.ep = 0.5 * m.ep;
  out.var_m = 0.25 * m.var_m + 0.25 * m.em;
  out.var_p = 0.25 * m.var_p + 0.25 * m.ep;
  out.cov_mp = 0.25 * m.cov_mp;
  return out;
}

MomentVector equilibrium_moments(const GeneParams& p) {
  p.validate();
  const Eigen::Matrix<double, 6, 6> pre =
      (p.tau_r * moment_generator(p, p.lambda1)).exp();
  const Eigen::Matrix<double, 6, 6> post =
      ((p.tau_d - p.tau_r) * moment_generator(p, 2.0 * p.lambda1)).exp();
  const Eigen::Matrix<double, 6, 6> cycle = division_matrix() * post * pre;
  const Eigen::Matrix<double, 5, 5> a = cycle.topLeftCorner<5, 5>();
  const Eigen::Matrix<double, 5, 1> b = cycle.topRightCorner<5, 1>();
  const Eigen::Matrix<double, 5, 5> lhs =
      Eigen::Matrix<double, 5, 5>::Identity() - a;
  const Eigen::Matrix<double, 5, 1> fixed = lhs.fullPivLu().solve(b);
  Eigen::Matrix<double, 6, 1> v;
  v << fixed, 1.0;
  const MomentVector m = from_vec(v);
  // Internal consistency: the transcript marginal at equilibrium is Poisson,
  // so its mean, its variance and the phase-0 profile value must coincide.
  const double x0 = mrna_poisson_parameter(p, 0.0);
  const double scale = std::max(1.0, x0);
  if (std::fabs(m.em - x0) > 1e-8 * scale ||
      std::fabs(m.var_m - m.em) > 1e-8 * scale)
    throw std::runtime_error("equilibrium_moments: Poisson consistency violated");
  return m;
}

std::vector<MomentVector> equilibrium_profile(const GeneParams& p,
                                              const std::vector<double>& phases) {
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i] < 0.0 || phases[i] >= p.tau_d)
      throw std::invalid_argument("equilibrium_profile: phase outside [0, tauD)");
    if (i > 0 && phases[i] < phases[i - 1])
      throw std::invalid_argument("equilibrium_profile: phases must be sorted");
  }
  std::vector<MomentVector> out;
  out.reserve(phases.size());
  MomentVector m = equilibrium_moments(p);
  double at = 0.0;
  for (double s : phases) {
    m = propagate_through(p, m, at, s);
    at = s;
    out.push_back(m);
  }
  return out;
}

double volume_at(const GeneParams& p, double s) {
  return p.v0 * std::exp2(s / p.tau_d);
}

// --------------------------------------------------------------------------

namespace {

struct LineageRecorder {
  const std::vector<double>* phases;
  std::size_t next = 0;
  std::vector<std::uint32_t>* m_out;
  std::vector<std::uint32_t>* p_out;
  bool active = false;

  void start_cycle(bool record) {
    next = 0;
    active = record;
  }
  // Records every phase in [from, to) with the pre-transition state.
  void cover(double to, std::uint64_t m, std::uint64_t p) {
    if (!active) return;
    while (next < phases->size() && (*phases)[next] < to) {
      m_out[next].push_back(static_cast<std::uint32_t>(m));
      p_out[next].push_back(static_cast<std::uint32_t>(p));
      ++next;
    }
  }
  void finish_cycle(std::uint64_t m, std::uint64_t p) {
    if (!active) return;
    while (next < phases->size()) {
      m_out[next].push_back(static_cast<std::uint32_t>(m));
      p_out[next].push_back(static_cast<std::uint32_t>(p));
      ++next;
    }
  }
};

}  // namespace

LineageSamples simulate_cell_lineage(const GeneParams& p, std::size_t n_cycles,
                                     const std::vector<double>& phases,
                                     RngStream& rng, const LineageOptions& opt) {
  p.validate();
  if (n_cycles < 1)
    throw std::invalid_argument("simulate_cell_lineage: need n_cycles >= 1");
  std::vector<double> sorted_phases = phases;
  std::sort(sorted_phases.begin(), sorted_phases.end());
  for (double s : sorted_phases)
    if (s < 0.0 || s >= p.tau_d)
      throw std::invalid_argument("simulate_cell_lineage: phase outside [0, tauD)");

  LineageSamples out;
  out.phases = sorted_phases;
  out.m.resize(sorted_phases.size());
  out.p.resize(sorted_phases.size());

  LineageRecorder rec{&out.phases, 0, out.m.data(), out.p.data(), false};

  CellState cell;
  cell.m = opt.initial_m;
  cell.p = opt.initial_p;
  const std::size_t thin = std::max<std::size_t>(1, opt.thin);
  const std::size_t total_cycles = opt.burn_in_cycles + n_cycles * thin;
  std::size_t recorded = 0;

  for (; cell.cycle < total_cycles && recorded < n_cycles; ++cell.cycle) {
    const bool record = cell.cycle >= opt.burn_in_cycles &&
                        (cell.cycle - opt.burn_in_cycles) % thin == 0;
    rec.start_cycle(record);
    if (record) ++recorded;

    cell.phase = 0.0;
    bool doubled = false;
    while (cell.phase < p.tau_d) {
      const double k = doubled ? 2.0 * p.lambda1 : p.lambda1;
      const double next_boundary = doubled ? p.tau_d : p.tau_r;
      const double md = static_cast<double>(cell.m);
      const double total = k + p.sigma1 * md + p.lambda2 * md;
      const double dt = rng.exponential(total);
      if (cell.phase + dt >= next_boundary) {
        rec.cover(next_boundary, cell.m, cell.p);
        cell.phase = next_boundary;
        if (!doubled) {
          doubled = true;  // replication doubles the transcription rate
        }
        continue;
      }
      cell.phase += dt;
      rec.cover(cell.phase, cell.m, cell.p);
      const double u = rng.uniform01() * total;
      if (u < k) {
        ++cell.m;
      } else if (u < k + p.sigma1 * md) {
        --cell.m;
      } else {
        ++cell.p;
      }
      if (cell.m + cell.p > opt.count_cap)
        throw std::runtime_error("simulate_cell_lineage: molecule count cap hit");
    }
    rec.finish_cycle(cell.m, cell.p);
    // Division: independent binomial halving, phase reset, single gene copy.
    cell.m = rng.binomial_half(cell.m);
    cell.p = rng.binomial_half(cell.p);
  }
  return out;
}

ConcentrationStats concentration_stats(const GeneParams& p, std::size_t n_cycles,
                                       const std::vector<double>& phases,
                                       RngStream& rng,
                                       const LineageOptions& opt) {
  const LineageSamples samples = simulate_cell_lineage(p, n_cycles, phases, rng, opt);
  ConcentrationStats stats;
  stats.rows.reserve(samples.phases.size());
  double mu_acc = 0.0;
  for (std::size_t i = 0; i < samples.phases.size(); ++i) {
    const double v = volume_at(p, samples.phases[i]);
    double m_mean = 0.0, p_mean = 0.0;
    const double n = static_cast<double>(samples.m[i].size());
    for (std::size_t j = 0; j < samples.m[i].size(); ++j) {
      m_mean += samples.m[i][j];
      p_mean += samples.p[i][j];
    }
    m_mean /= n;
    p_mean /= n;
    double m_var = 0.0, p_var = 0.0;
    for (std::size_t j = 0; j < samples.m[i].size(); ++j) {
      m_var += (samples.m[i][j] - m_mean) * (samples.m[i][j] - m_mean);
      p_var += (samples.p[i][j] - p_mean) * (samples.p[i][j] - p_mean);
    }
    m_var /= (n - 1.0);
    p_var /= (n - 1.0);
    ConcentrationRow row;
    row.s = samples.phases[i];
    row.mean_conc_m = m_mean / v;
    row.mean_conc_p = p_mean / v;
    row.cv_m = m_mean > 0.0 ? m_var / (m_mean * m_mean) : 0.0;
    row.cv_p = p_mean > 0.0 ? p_var / (p_mean * p_mean) : 0.0;
    stats.rows.push_back(row);
    mu_acc += row.mean_conc_p;
  }
  stats.mu_p = mu_acc / static_cast<double>(stats.rows.size());
  double worst = 0.0;
  for (const auto& row : stats.rows)
    worst = std::max(worst, std::fabs(row.mean_conc_p - stats.mu_p));
  stats.fluctuation_amplitude = stats.mu_p > 0.0 ? worst / stats.mu_p : 0.0;
  return stats;
}

CvPoint cv_point(const GeneParams& p, int n_quad) {
  p.validate();
  if (n_quad < 8) throw std::invalid_argument("cv_point: quadrature too coarse");
  // Midpoint rule over the uniformly distributed cycle phase.
  std::vector<double> phases(n_quad);
  for (int j = 0; j < n_quad; ++j)
    phases[j] = p.tau_d * (j + 0.5) / static_cast<double>(n_quad);
  const auto profile = equilibrium_profile(p, phases);
  double mean_acc = 0.0, second_acc = 0.0;
  for (int j = 0; j < n_quad; ++j) {
    const double v = volume_at(p, phases[j]);
    const double c = profile[j].ep / v;
    mean_acc += c;
    second_acc += (profile[j].var_p + profile[j].ep * profile[j].ep) / (v * v);
  }
  const double mu = mean_acc / n_quad;
  const double second = second_acc / n_quad;
  CvPoint point;
  point.params = p;
  point.mu_p = mu;
  point.cv2 = (second - mu * mu) / (mu * mu);
  return point;
}

std::vector<CvPoint> cv_scan(const std::vector<GeneParams>& grid) {
  std::vector<CvPoint> out;
  out.reserve(grid.size());
  for (const auto& p : grid) out.push_back(cv_point(p));
  return out;
}

}  // namespace pdmplab::gene
