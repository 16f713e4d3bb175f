#include "pdmplab/rate_matrix.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pdmplab {

RateMatrix::RateMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
  validate_and_classify();
}

RateMatrix RateMatrix::from_rates(const Eigen::MatrixXd& rates) {
  Eigen::MatrixXd q = rates;
  for (int i = 0; i < q.rows(); ++i) {
    q(i, i) = 0.0;
    q(i, i) = -q.row(i).sum();
  }
  return RateMatrix(std::move(q));
}

RateMatrix RateMatrix::two_state(double rate01, double rate10) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
  r(0, 1) = rate01;
  r(1, 0) = rate10;
  return from_rates(r);
}

RateMatrix RateMatrix::symmetric_two_state(double rate) {
  return two_state(rate, rate);
}

RateMatrix RateMatrix::cycle(int n_states, double rate) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n_states, n_states);
  for (int i = 0; i < n_states; ++i) r(i, (i + 1) % n_states) = rate;
  return from_rates(r);
}

RateMatrix RateMatrix::single_state() {
  return RateMatrix(Eigen::MatrixXd::Zero(1, 1));
}

void RateMatrix::validate_and_classify() {
  const int n = static_cast<int>(q_.rows());
  if (n == 0 || q_.cols() != n)
    throw std::invalid_argument("RateMatrix: generator must be square and nonempty");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i != j && q_(i, j) < 0.0)
        throw std::invalid_argument("RateMatrix: negative off-diagonal rate");
      row += q_(i, j);
    }
    if (std::fabs(row) > 1e-12)
      throw std::invalid_argument("RateMatrix: row sums must vanish (|sum| <= 1e-12)");
  }
  // Strong connectivity of the transition graph: forward and backward
  // reachability from state 0 must both cover everything.
  auto reachable = [&](bool forward) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        const double r = forward ? q_(u, v) : q_(v, u);
        if (u != v && r > 0.0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    return seen;
  };
  const auto fwd = reachable(true);
  const auto bwd = reachable(false);
  irreducible_ = true;
  for (int i = 0; i < n; ++i)
    if (!fwd[i] || !bwd[i]) irreducible_ = false;
}

Eigen::VectorXd RateMatrix::stationary_distribution() const {
  const int n = size();
  if (!irreducible_) {
    const auto reach = [&](bool forward) {
      std::vector<bool> seen(n, false);
      std::vector<int> stack{0};
      seen[0] = true;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
          const double r = forward ? q_(u, v) : q_(v, u);
          if (u != v && r > 0.0 && !seen[v]) {
            seen[v] = true;
            stack.push_back(v);
          }
        }
      }
      return seen;
    };
    const auto fwd = reach(true);
    const auto bwd = reach(false);
    std::ostringstream msg;
    msg << "stationary_distribution: generator is reducible; states {";
    bool first = true;
    for (int i = 0; i < n; ++i) {
      if (fwd[i] && bwd[i]) continue;
      msg << (first ? "" : ", ") << i;
      first = false;
    }
    msg << "} do not communicate with state 0";
    throw std::invalid_argument(msg.str());
  }
  // Solve nu^T Q = 0 with the normalization sum(nu) = 1 by replacing one
  // equation of Q^T nu = 0 with the all-ones row.
  Eigen::MatrixXd a = q_.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd nu = a.fullPivLu().solve(b);
  const double residual = (q_.transpose() * nu).norm();
  if (residual > 1e-10)
    throw std::runtime_error("stationary_distribution: residual above 1e-10");
  for (int i = 0; i < n; ++i)
    if (nu(i) <= 0.0)
      throw std::runtime_error("stationary_distribution: nonpositive component");
  return nu;
}

CtmcPath simulate_ctmc(const RateMatrix& q, int y0, double horizon,
                       RngStream& rng) {
  if (y0 < 0 || y0 >= q.size())
    throw std::domain_error("simulate_ctmc: initial state out of range");
  if (horizon <= 0.0)
    throw std::invalid_argument("simulate_ctmc: horizon must be > 0");
  CtmcPath path;
  double t = 0.0;
  int y = y0;
  std::vector<double> row(q.size());
  while (t < horizon) {
    const double exit = q.exit_rate(y);
    if (exit <= 0.0) {
      path.push_back({t, horizon, y});
      break;
    }
    const double hold = rng.exponential(exit);
    const double t_end = std::min(t + hold, horizon);
    path.push_back({t, t_end, y});
    if (t_end >= horizon) break;
    for (int j = 0; j < q.size(); ++j) row[j] = (j == y) ? 0.0 : q.rate(y, j);
    y = static_cast<int>(rng.pick_weighted(row));
    t = t_end;
  }
  return path;
}

CtmcStream::CtmcStream(const RateMatrix& q, int y0, RngStream& rng)
    : q_(&q), rng_(&rng), state_(y0), row_(q.size()) {
  if (y0 < 0 || y0 >= q.size())
    throw std::domain_error("CtmcStream: initial state out of range");
}

double CtmcStream::advance() {
  const double exit = q_->exit_rate(state_);
  if (exit <= 0.0) return INFINITY;
  const double hold = rng_->exponential(exit);
  for (int j = 0; j < q_->size(); ++j)
    row_[j] = (j == state_) ? 0.0 : q_->rate(state_, j);
  state_ = static_cast<int>(rng_->pick_weighted(row_));
  return hold;
}

double occupation_fraction(const CtmcPath& path, int state) {
  if (path.empty()) return 0.0;
  double occ = 0.0;
  for (const auto& seg : path)
    if (seg.state == state) occ += seg.t_end - seg.t_begin;
  return occ / (path.back().t_end - path.front().t_begin);
}

double integrate_along(const CtmcPath& path, const std::vector<double>& a) {
  double acc = 0.0, comp = 0.0;
  for (const auto& seg : path) {
    const double y = a.at(seg.state) * (seg.t_end - seg.t_begin) - comp;
    const double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  }
  return acc;
}

}  // namespace pdmplab
