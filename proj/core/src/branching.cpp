#include "pdmplab/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "pdmplab/pdmp.hpp"

namespace pdmplab::branching {

TraitFlow exponential_trait(double growth_rate) {
  TraitFlow flow;
  flow.advance = [growth_rate](double x, double dt) {
    return x * std::exp(growth_rate * dt);
  };
  flow.derivative = [growth_rate](double x) { return growth_rate * x; };
  return flow;
}

OffspringLaw::OffspringLaw(std::vector<double> probs) : p(std::move(probs)) {
  double total = 0.0;
  for (double q : p) {
    if (q < 0.0) throw std::invalid_argument("OffspringLaw: negative probability");
    total += q;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("OffspringLaw: probabilities must sum to one");
  if (p.size() > 1 && p[1] != 0.0)
    throw std::invalid_argument("OffspringLaw: single-child divisions are excluded");
}

OffspringLaw OffspringLaw::binary() { return OffspringLaw({0.0, 0.0, 1.0}); }

OffspringLaw OffspringLaw::binary_with_death(double p0) {
  if (p0 < 0.0 || p0 >= 1.0)
    throw std::invalid_argument("OffspringLaw: death probability in [0,1)");
  return OffspringLaw({p0, 0.0, 1.0 - p0});
}

double OffspringLaw::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) m += static_cast<double>(k) * p[k];
  return m;
}

int OffspringLaw::sample(RngStream& rng) const {
  return static_cast<int>(rng.pick_weighted(p));
}

namespace {

std::vector<double> equal_split(double x, int k, RngStream&) {
  return std::vector<double>(static_cast<std::size_t>(k), k > 0 ? x / k : 0.0);
}

}  // namespace

BranchingSpec size_structured_spec(double growth_rate) {
  BranchingSpec spec;
  spec.flow = exponential_trait(growth_rate);
  spec.division_rate = [](double x) { return x; };
  spec.gamma = 1.0;
  spec.b1 = 1.0;
  spec.b2 = 0.0;
  spec.offspring = OffspringLaw::binary();
  spec.kernel = equal_split;
  AnalyticHazard hz;
  if (growth_rate != 0.0) {
    const double r = growth_rate;
    hz.cumulative = [r](double x0, double t) { return x0 * std::expm1(r * t) / r; };
    hz.invert = [r](double x0, double e) {
      const double arg = 1.0 + r * e / x0;
      if (arg <= 0.0) return std::numeric_limits<double>::infinity();  // hazard saturates below the drawn level
      return std::log(arg) / r;
    };
  } else {
    hz.cumulative = [](double x0, double t) { return x0 * t; };
    hz.invert = [](double x0, double e) {
      return x0 > 0.0 ? e / x0 : std::numeric_limits<double>::infinity();
    };
  }
  spec.hazard = hz;
  const double r = growth_rate;
  spec.window_majorant = [r](double x, double window) {
    return std::max(x, x * std::exp(r * window));
  };
  return spec;
}

BranchingSpec constant_rate_spec(double rate, double trait_growth_rate,
                                 double p_death) {
  if (rate < 0.0) throw std::invalid_argument("constant_rate_spec: rate >= 0");
  BranchingSpec spec;
  spec.flow = exponential_trait(trait_growth_rate);
  spec.division_rate = [rate](double) { return rate; };
  spec.gamma = 0.0;
  spec.b1 = 0.0;
  spec.b2 = rate;
  spec.offspring = p_death > 0.0 ? OffspringLaw::binary_with_death(p_death)
                                 : OffspringLaw::binary();
  spec.kernel = equal_split;
  AnalyticHazard hz;
  hz.cumulative = [rate](double, double t) { return rate * t; };
  hz.invert = [rate](double, double e) {
    return rate > 0.0 ? e / rate : std::numeric_limits<double>::infinity();
  };
  spec.hazard = hz;
  spec.window_majorant = [rate](double, double) { return rate; };
  return spec;
}

AssumptionReport check_assumptions(const BranchingSpec& spec, double x_lo,
                                   double x_hi, int n_grid, RngStream& rng,
                                   int kernel_samples) {
  AssumptionReport rep{true, true, true, 0.0, 0.0};
  for (int i = 0; i < n_grid; ++i) {
    const double x =
        x_lo + (x_hi - x_lo) * static_cast<double>(i) / std::max(1, n_grid - 1);
    const double bound = spec.b1 * std::pow(std::fabs(x), spec.gamma) + spec.b2;
    const double gap = spec.division_rate(x) - bound;
    rep.worst_rate_gap = std::max(rep.worst_rate_gap, gap);
    if (gap > 1e-12 * std::max(1.0, bound)) rep.rate_bound_ok = false;

    // Mass condition: mean total child trait at division stays below the
    // mother's trait (or the floor for small traits).
    double mass_acc = 0.0;
    int n_mass = 0;
    for (int s = 0; s < kernel_samples; ++s) {
      const int k = spec.offspring.sample(rng);
      if (k == 0) continue;
      const auto children = spec.kernel(x, k, rng);
      double total = 0.0;
      for (double c : children) total += c;
      mass_acc += total;
      ++n_mass;
    }
    if (n_mass > 0) {
      const double mean_mass = mass_acc / n_mass;
      const double allowed = std::max(x, x_lo);
      const double mgap = mean_mass - allowed;
      rep.worst_mass_gap = std::max(rep.worst_mass_gap, mgap);
      if (mgap > 0.05 * std::max(1.0, allowed)) rep.mass_condition_ok = false;
    }
  }
  if (spec.offspring.mean() > spec.declared_mean_bound() + 1e-12)
    rep.mean_bound_ok = false;
  return rep;
}

bool BranchingTree::alive_at(std::size_t id, double t) const {
  const auto& u = individuals[id];
  return u.birth_time <= t && t < u.division_time;
}

std::vector<std::size_t> BranchingTree::alive_set(double t) const {
  if (t > horizon)
    throw std::invalid_argument("BranchingTree: query beyond the horizon");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < individuals.size(); ++i)
    if (alive_at(i, t)) out.push_back(i);
  return out;
}

std::size_t BranchingTree::population_at(double t) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < individuals.size(); ++i)
    if (alive_at(i, t)) ++n;
  return n;
}

double BranchingTree::trait_at(std::size_t id, double t) const {
  const auto& u = individuals[id];
  return flow.advance(u.trait_at_birth, t - u.birth_time);
}

void BranchingTree::validate() const {
  for (std::size_t i = 0; i < individuals.size(); ++i) {
    const auto& u = individuals[i];
    if (!(u.birth_time < u.division_time))
      throw std::logic_error("BranchingTree: birth not before division");
    if (u.parent < 0) continue;
    if (static_cast<std::size_t>(u.parent) >= i)
      throw std::logic_error("BranchingTree: parent must precede child");
    const auto& mother = individuals[static_cast<std::size_t>(u.parent)];
    if (mother.division_time != u.birth_time)
      throw std::logic_error("BranchingTree: child birth != mother division");
  }
}

namespace {

struct PendingDivision {
  double time;
  std::size_t id;
  bool operator>(const PendingDivision& o) const {
    return time > o.time || (time == o.time && id > o.id);
  }
};

}  // namespace

double division_time_sample(double x0, const BranchingSpec& spec, RngStream& rng,
                            double max_time) {
  const double level = rng.exponential(1.0);
  if (spec.hazard) {
    const double t = spec.hazard->invert(x0, level);
    return t <= max_time ? t : INFINITY;
  }
  if (!spec.window_majorant)
    throw std::invalid_argument(
        "division_time_sample: thinning needs a window majorant when no "
        "analytic hazard is registered");
  // Window thinning: propose at the per-window majorant rate, accept with
  // ratio B(x(s))/majorant.
  const double window = 1.0;
  double s = 0.0;
  double x = x0;
  while (s < max_time) {
    const double span = std::min(window, max_time - s);
    const double big = spec.window_majorant(x, span);
    if (big <= 0.0) {
      x = spec.flow.advance(x, span);
      s += span;
      continue;
    }
    double local = 0.0;
    while (true) {
      local += rng.exponential(big);
      if (local > span) break;
      const double x_prop = spec.flow.advance(x, local);
      const double rate = spec.division_rate(x_prop);
      if (rate > big * (1.0 + 1e-12))
        throw std::runtime_error(
            "division_time_sample: division rate exceeds the window majorant");
      if (rng.uniform01() * big < rate) return s + local;
    }
    x = spec.flow.advance(x, span);
    s += span;
  }
  return INFINITY;
}

BranchingTree simulate_tree(const BranchingSpec& spec, double x0, double horizon,
                            RngStream& rng) {
  if (horizon <= 0.0)
    throw std::invalid_argument("simulate_tree: horizon must be > 0");
  BranchingTree tree;
  tree.horizon = horizon;
  tree.flow = spec.flow;

  std::priority_queue<PendingDivision, std::vector<PendingDivision>,
                      std::greater<PendingDivision>>
      pending;

  auto spawn = [&](std::int64_t parent, double birth, double trait) {
    if (tree.individuals.size() >= spec.population_cap)
      throw PopulationCapError(spec.population_cap);
    const double tau =
        division_time_sample(trait, spec, rng, horizon - birth);
    Individual u;
    u.parent = parent;
    u.birth_time = birth;
    u.division_time = std::isfinite(tau) ? birth + tau : INFINITY;
    u.trait_at_birth = trait;
    const std::size_t id = tree.individuals.size();
    tree.individuals.push_back(u);
    if (std::isfinite(u.division_time)) pending.push({u.division_time, id});
  };

  spawn(-1, 0.0, x0);
  while (!pending.empty()) {
    const auto next = pending.top();
    pending.pop();
    const auto mother = tree.individuals[next.id];  // copy: vector may grow
    const double trait_div = spec.flow.advance(
        mother.trait_at_birth, mother.division_time - mother.birth_time);
    const int k = spec.offspring.sample(rng);
    if (k == 0) continue;
    const auto children = spec.kernel(trait_div, k, rng);
    for (double c : children)
      spawn(static_cast<std::int64_t>(next.id), mother.division_time, c);
  }
  return tree;
}

double population_functional(const BranchingTree& tree,
                             const std::function<double(double)>& f, double t) {
  if (t > tree.horizon)
    throw std::invalid_argument("population_functional: t beyond the horizon");
  double acc = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < tree.individuals.size(); ++i) {
    if (!tree.alive_at(i, t)) continue;
    const double y = f(tree.trait_at(i, t)) - comp;
    const double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  return acc;
}

Lineage uniform_sample_lineage(const BranchingTree& tree, double t,
                               RngStream& rng) {
  const auto alive = tree.alive_set(t);
  if (alive.empty())
    throw std::runtime_error("uniform_sample_lineage: population extinct at t");
  const std::size_t pick = alive[rng.uniform_below(alive.size())];
  Lineage lin;
  lin.sampled = pick;
  std::int64_t cur = static_cast<std::int64_t>(pick);
  while (cur >= 0) {
    lin.ids.push_back(static_cast<std::size_t>(cur));
    cur = tree.individuals[static_cast<std::size_t>(cur)].parent;
  }
  std::reverse(lin.ids.begin(), lin.ids.end());
  return lin;
}

double lineage_trait_at(const BranchingTree& tree, const Lineage& lineage,
                        double s) {
  // Right-continuous: at a division instant the child's trait applies.
  for (auto it = lineage.ids.rbegin(); it != lineage.ids.rend(); ++it) {
    const auto& u = tree.individuals[*it];
    if (u.birth_time <= s) return tree.trait_at(*it, s);
  }
  throw std::invalid_argument("lineage_trait_at: time precedes the root's birth");
}

SpineSpec::SpineSpec(double rate, OffspringLaw law, TraitFlow flow_)
    : division_rate(rate), offspring(std::move(law)), flow(std::move(flow_)) {
  if (rate < 0.0) throw std::invalid_argument("SpineSpec: rate must be >= 0");
  if (std::fabs(offspring.mean() - 1.0) < 1e-12)
    throw std::invalid_argument(
        "SpineSpec: mean offspring of one makes the auxiliary process "
        "degenerate; rejected");
}

double SpineSpec::mean_population(double t) const {
  return std::exp(division_rate * (offspring.mean() - 1.0) * t);
}

SpinePath simulate_spine(const SpineSpec& spec, double x0, double t,
                         RngStream& rng) {
  SpinePath path;
  double now = 0.0;
  double x = x0;
  const double rate = spec.jump_rate();
  while (rate > 0.0) {
    const double tau = rng.exponential(rate);
    if (now + tau >= t) break;
    now += tau;
    x = spec.flow.advance(x, tau);
    x *= 0.5;  // size-biased marginal of the equal binary split
    path.jump_times.push_back(now);
  }
  path.trait_end = spec.flow.advance(x, t - now);
  return path;
}

SpinePath simulate_spine(const InhomogeneousSpineSpec& spec, double x0, double t,
                         RngStream& rng) {
  if (!(spec.rate_majorant > 0.0))
    throw std::invalid_argument(
        "simulate_spine: the inhomogeneous form needs a positive rate majorant");
  if (std::fabs(spec.offspring.mean() - 1.0) < 1e-12)
    throw std::invalid_argument(
        "simulate_spine: mean offspring of one makes the auxiliary process "
        "degenerate; rejected");
  auto biased_rate = [&](double x, double s) {
    const double m_here = spec.mean_population(x, s, t);
    double acc = 0.0;
    for (std::size_t k = 2; k < spec.offspring.p.size(); ++k)
      if (spec.offspring.p[k] > 0.0)
        acc += static_cast<double>(k) * spec.offspring.p[k] *
               spec.mean_population(x / static_cast<double>(k), s, t) / m_here;
    return spec.division_rate(x) * acc;
  };
  SpinePath path;
  double now = 0.0;
  double x = x0;
  for (;;) {
    const double tau = rng.exponential(spec.rate_majorant);
    if (now + tau >= t) break;
    now += tau;
    x = spec.flow.advance(x, tau);
    const double rate = biased_rate(x, now);
    if (rate > spec.rate_majorant * (1.0 + 1e-12))
      throw std::runtime_error(
          "simulate_spine: biased jump rate exceeds the declared majorant");
    if (rng.uniform01() * spec.rate_majorant < rate) {
      // Size-biased pick of a child count, then an equal-split child.
      std::vector<double> w(spec.offspring.p.size(), 0.0);
      for (std::size_t k = 2; k < w.size(); ++k)
        w[k] = static_cast<double>(k) * spec.offspring.p[k] *
               spec.mean_population(x / static_cast<double>(k), now, t);
      const std::size_t k = rng.pick_weighted(w);
      x /= static_cast<double>(k);
      path.jump_times.push_back(now);
    }
  }
  path.trait_end = spec.flow.advance(x, t - now);
  return path;
}

ManyToOneCheck many_to_one_check(const BranchingSpec& spec, const SpineSpec& aux,
                                 const std::function<double(double)>& f,
                                 double x0, double t, std::size_t n_rep,
                                 std::uint64_t seed, int n_threads) {
  const auto pop = replica_map<double>(
      seed, n_rep,
      [&](std::size_t, RngStream& rng) {
        const auto tree = simulate_tree(spec, x0, t, rng);
        return population_functional(tree, f, t);
      },
      n_threads);
  const auto spine = replica_map<double>(
      seed ^ 0x9d2c5680ull, n_rep,
      [&](std::size_t, RngStream& rng) {
        return f(simulate_spine(aux, x0, t, rng).trait_end);
      },
      n_threads);
  ManyToOneCheck check;
  check.population_side = stats::summarize(pop);
  check.spine_side = stats::summarize(spine);
  check.mean_factor = aux.mean_population(t);
  check.z = stats::z_score(check.population_side.mean, check.population_side.se,
                           check.mean_factor * check.spine_side.mean,
                           check.mean_factor * check.spine_side.se);
  return check;
}

SamplingLimitCheck sampling_limit_check(
    const BranchingSpec& spec, const SpineSpec& aux,
    const std::function<double(double)>& f, double x0, double t,
    const std::vector<std::size_t>& n_initial_schedule, std::size_t n_rep,
    std::uint64_t seed, int n_threads) {
  SamplingLimitCheck out;
  const auto spine = replica_map<double>(
      seed ^ 0xa0c1b2d3ull, n_rep,
      [&](std::size_t, RngStream& rng) {
        return f(simulate_spine(aux, x0, t, rng).trait_end);
      },
      n_threads);
  out.spine = stats::summarize(spine);

  for (std::size_t gi = 0; gi < n_initial_schedule.size(); ++gi) {
    const std::size_t n_init = n_initial_schedule[gi];
    const auto sampled = replica_map<double>(
        seed + 1000 * (gi + 1), n_rep,
        [&](std::size_t, RngStream& rng) {
          std::vector<BranchingTree> forest;
          forest.reserve(n_init);
          std::size_t total_alive = 0;
          for (std::size_t k = 0; k < n_init; ++k) {
            forest.push_back(simulate_tree(spec, x0, t, rng));
            total_alive += forest.back().population_at(t);
          }
          if (total_alive == 0)
            throw std::runtime_error(
                "sampling_limit_check: all trees extinct at t");
          std::uint64_t pick = rng.uniform_below(total_alive);
          for (const auto& tree : forest) {
            const auto alive = tree.alive_set(t);
            if (pick < alive.size())
              return f(tree.trait_at(alive[pick], t));
            pick -= alive.size();
          }
          throw std::logic_error("sampling_limit_check: pick out of range");
        },
        n_threads);
    SamplingLimitPoint point;
    point.n_initial = n_init;
    point.sampled = stats::summarize(sampled);
    point.values = sampled;
    point.z = stats::z_score(point.sampled.mean, point.sampled.se, out.spine.mean,
                             out.spine.se);
    out.points.push_back(point);
  }
  return out;
}

}  // namespace pdmplab::branching
