#include "pdmplab_cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace pdmplab::cli {

using nlohmann::json;

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{
      "malthus", "planar", "coupling", "branching", "ifire", "gene", "cvscan"};
  return names;
}

std::string ValidationResult::joined_errors() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < errors.size(); ++i)
    os << (i ? "; " : "") << errors[i];
  return os.str();
}

namespace {

// Collects all schema violations for one scenario object.
struct Checker {
  const json& raw;
  json out = json::object();
  std::vector<std::string> errors;
  std::set<std::string> known;

  explicit Checker(const json& r) : raw(r) {}

  void fail(const std::string& key, const std::string& what) {
    errors.push_back(key + ": " + what);
  }

  bool present(const char* key) { return raw.contains(key); }

  double number(const char* key, bool required, double def) {
    known.insert(key);
    if (!raw.contains(key)) {
      if (required) {
        fail(key, "missing required key");
        return def;
      }
      out[key] = def;
      return def;
    }
    if (!raw[key].is_number()) {
      fail(key, "expected a number");
      return def;
    }
    const double v = raw[key].get<double>();
    out[key] = v;
    return v;
  }

  std::int64_t integer(const char* key, bool required, std::int64_t def) {
    known.insert(key);
    if (!raw.contains(key)) {
      if (required) {
        fail(key, "missing required key");
        return def;
      }
      out[key] = def;
      return def;
    }
    if (!raw[key].is_number_integer()) {
      fail(key, "expected an integer");
      return def;
    }
    const std::int64_t v = raw[key].get<std::int64_t>();
    out[key] = v;
    return v;
  }

  std::string str(const char* key, bool required, const std::string& def) {
    known.insert(key);
    if (!raw.contains(key)) {
      if (required) fail(key, "missing required key");
      else out[key] = def;
      return def;
    }
    if (!raw[key].is_string()) {
      fail(key, "expected a string");
      return def;
    }
    const auto v = raw[key].get<std::string>();
    out[key] = v;
    return v;
  }

  std::vector<double> number_array(const char* key, bool required,
                                   std::vector<double> def = {}) {
    known.insert(key);
    if (!raw.contains(key)) {
      if (required) fail(key, "missing required key");
      else out[key] = def;
      return def;
    }
    if (!raw[key].is_array()) {
      fail(key, "expected an array of numbers");
      return def;
    }
    std::vector<double> v;
    for (const auto& e : raw[key]) {
      if (!e.is_number()) {
        fail(key, "expected an array of numbers");
        return def;
      }
      v.push_back(e.get<double>());
    }
    out[key] = v;
    return v;
  }

  // Square matrix as an array of equal-length numeric rows.
  std::vector<std::vector<double>> matrix(const char* key, bool required) {
    known.insert(key);
    std::vector<std::vector<double>> m;
    if (!raw.contains(key)) {
      if (required) fail(key, "missing required key");
      return m;
    }
    if (!raw[key].is_array() || raw[key].empty()) {
      fail(key, "expected a nonempty array of rows");
      return m;
    }
    for (const auto& row : raw[key]) {
      if (!row.is_array()) {
        fail(key, "expected rows to be arrays");
        return {};
      }
      std::vector<double> r;
      for (const auto& e : row) {
        if (!e.is_number()) {
          fail(key, "expected numeric entries");
          return {};
        }
        r.push_back(e.get<double>());
      }
      m.push_back(std::move(r));
    }
    for (const auto& r : m)
      if (r.size() != m.size()) {
        fail(key, "matrix must be square");
        return {};
      }
    out[key] = raw[key];
    return m;
  }

  void keep(const char* key) { known.insert(key); }

  void reject_unknown() {
    for (auto it = raw.begin(); it != raw.end(); ++it)
      if (!known.count(it.key())) errors.push_back(it.key() + ": unknown key");
  }
};

void validate_malthus(Checker& c) {
  const auto rates = c.matrix("rates", true);
  const auto growth = c.number_array("growth", true);
  const double x0 = c.number("x0", false, 1.0);
  const double p_min = c.number("p_min", false, 0.0);
  const double p_max = c.number("p_max", false, 2.0);
  const auto p_count = c.integer("p_count", false, 41);
  const double horizon = c.number("horizon", false, 10.0);
  if (x0 <= 0.0) c.fail("x0", "must be > 0");
  if (p_min < 0.0) c.fail("p_min", "must be >= 0");
  if (p_max <= p_min) c.fail("p_max", "must exceed p_min");
  if (p_count < 2) c.fail("p_count", "must be >= 2");
  if (horizon <= 0.0) c.fail("horizon", "must be > 0");
  if (!rates.empty() && growth.size() != rates.size())
    c.fail("growth", "must have one rate per environment state");
}

void validate_planar(Checker& c) {
  const auto grid = c.number_array("lambda_grid", true);
  for (double v : grid)
    if (v <= 0.0) {
      c.fail("lambda_grid", "switching rates must be > 0");
      break;
    }
  const double horizon = c.number("horizon", false, 200.0);
  const auto n_rep = c.integer("n_rep", false, 16);
  const double renorm = c.number("renorm_dt", false, 1.0);
  if (horizon <= 0.0) c.fail("horizon", "must be > 0");
  if (n_rep < 2) c.fail("n_rep", "must be >= 2");
  if (renorm <= 0.0) c.fail("renorm_dt", "must be > 0");
  if (c.present("m0") || c.present("m1")) {
    const auto m0 = c.matrix("m0", true);
    const auto m1 = c.matrix("m1", true);
    if (!m0.empty() && !m1.empty() && m0.size() != m1.size())
      c.fail("m1", "must match the shape of m0");
  } else {
    c.keep("m0");
    c.keep("m1");
  }
}

void validate_coupling(Checker& c) {
  const auto rates = c.matrix("rates", true);
  c.keep("fields");
  std::size_t dim = 0;
  if (!c.raw.contains("fields")) {
    c.fail("fields", "missing required key");
  } else if (!c.raw["fields"].is_array() ||
             c.raw["fields"].size() != rates.size()) {
    c.fail("fields", "need one matrix per environment state");
  } else {
    for (const auto& fm : c.raw["fields"]) {
      if (!fm.is_array() || fm.empty() || !fm[0].is_array()) {
        c.fail("fields", "each field must be a matrix");
        break;
      }
      if (dim == 0) dim = fm.size();
      if (fm.size() != dim) {
        c.fail("fields", "all field matrices must share one dimension");
        break;
      }
    }
    c.out["fields"] = c.raw["fields"];
  }
  const auto x0 = c.number_array("x0", true);
  const auto x0p = c.number_array("x0_prime", true);
  if (dim != 0 && (x0.size() != dim || x0p.size() != dim))
    c.fail("x0", "initial points must match the field dimension");
  const double horizon = c.number("horizon", false, 10.0);
  const double grid_dt = c.number("grid_dt", false, 0.05);
  if (horizon <= 0.0) c.fail("horizon", "must be > 0");
  if (grid_dt <= 0.0) c.fail("grid_dt", "must be > 0");
}

void validate_branching(Checker& c) {
  const auto kind = c.str("kind", true, "constant");
  if (kind != "constant" && kind != "size-structured")
    c.fail("kind", "must be \"constant\" or \"size-structured\"");
  c.number("growth_rate", false, 0.01);
  if (kind == "constant") {
    const double rate = c.number("rate", true, 1.0);
    if (rate < 0.0) c.fail("rate", "must be >= 0");
  } else {
    c.keep("rate");
  }
  const double p_death = c.number("p_death", false, 0.0);
  if (p_death < 0.0 || p_death >= 1.0) c.fail("p_death", "must lie in [0, 1)");
  const double x0 = c.number("x0", false, 1.0);
  if (x0 <= 0.0) c.fail("x0", "must be > 0");
  const double horizon = c.number("horizon", false, 50.0);
  if (horizon <= 0.0) c.fail("horizon", "must be > 0");
}

void validate_ifire(Checker& c) {
  const auto rates = c.matrix("rates", true);
  const auto celerity = c.number_array("celerity", true);
  if (!rates.empty() && celerity.size() != rates.size())
    c.fail("celerity", "need one celerity per environment state");
  for (double a : celerity)
    if (a <= 0.0) {
      c.fail("celerity", "celerities must be > 0");
      break;
    }
  const double floor = c.number("floor", false, 0.0);
  const double threshold = c.number("threshold", false, 1.0);
  if (threshold <= floor) c.fail("threshold", "must exceed floor");

  c.keep("reset");
  if (!c.raw.contains("reset")) {
    c.fail("reset", "missing required key");
  } else if (!c.raw["reset"].is_array()) {
    c.fail("reset", "expected an array of reset measures");
  } else {
    const auto& arr = c.raw["reset"];
    if (arr.size() != 1 && arr.size() != rates.size())
      c.fail("reset", "need one measure per environment state (or one shared)");
    for (const auto& r : arr) {
      if (!r.is_object() || !r.contains("kind") || !r["kind"].is_string()) {
        c.fail("reset", "each measure needs a string \"kind\"");
        continue;
      }
      const auto kind = r["kind"].get<std::string>();
      if (kind == "uniform") {
        if (!r.contains("lo") || !r.contains("hi") || !r["lo"].is_number() ||
            !r["hi"].is_number()) {
          c.fail("reset", "uniform measures need numeric lo/hi");
          continue;
        }
        const double lo = r["lo"].get<double>(), hi = r["hi"].get<double>();
        if (!(floor <= lo && lo < hi && hi <= threshold))
          c.fail("reset", "uniform support must sit inside (floor, threshold)");
      } else if (kind == "point") {
        if (!r.contains("value") || !r["value"].is_number()) {
          c.fail("reset", "point measures need a numeric value");
          continue;
        }
        const double v = r["value"].get<double>();
        if (!(floor < v && v < threshold))
          c.fail("reset", "point value must sit inside (floor, threshold)");
      } else {
        c.fail("reset", "unknown measure kind \"" + kind + "\"");
      }
    }
    c.out["reset"] = arr;
  }

  const auto schedule = c.number_array("epsilon_schedule", true);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] <= 0.0) {
      c.fail("epsilon_schedule", "entries must be > 0");
      break;
    }
    if (i > 0 && schedule[i] >= schedule[i - 1]) {
      c.fail("epsilon_schedule", "must be strictly decreasing");
      break;
    }
  }
  const auto hits = c.integer("n_first_hits", false, 10000);
  if (hits < 100) c.fail("n_first_hits", "must be >= 100");
  const auto prehit = c.integer("n_prehit_replicas", false, 100);
  if (prehit < 2) c.fail("n_prehit_replicas", "must be >= 2");
  const auto env0 = c.integer("initial_env", false, 0);
  if (env0 < 0 || (rates.size() && env0 >= static_cast<std::int64_t>(rates.size())))
    c.fail("initial_env", "out of range");
}

void validate_gene(Checker& c) {
  const double lambda1 = c.number("lambda1", true, 1.0);
  const double sigma1 = c.number("sigma1", true, 1.0);
  const double lambda2 = c.number("lambda2", true, 1.0);
  const double tau_r = c.number("tauR", true, 0.4);
  const double tau_d = c.number("tauD", true, 1.0);
  const double v0 = c.number("V0", false, 1.0);
  if (lambda1 <= 0.0) c.fail("lambda1", "must be > 0");
  if (sigma1 <= 0.0) c.fail("sigma1", "must be > 0");
  if (lambda2 < 0.0) c.fail("lambda2", "must be >= 0");
  if (tau_r < 0.0) c.fail("tauR", "must be >= 0");
  if (!(tau_r < tau_d)) c.fail("tauR", "constraint tauR < tauD violated");
  if (v0 <= 0.0) c.fail("V0", "must be > 0");
  const auto n_cycles = c.integer("n_cycles", false, 20000);
  if (n_cycles < 100) c.fail("n_cycles", "must be >= 100");
  const auto burn_in = c.integer("burn_in", false, 100);
  if (burn_in < 0) c.fail("burn_in", "must be >= 0");
  const auto phases = c.integer("phase_count", false, 24);
  if (phases < 2) c.fail("phase_count", "must be >= 2");
  const auto thin = c.integer("thin", false, 1);
  if (thin < 1) c.fail("thin", "must be >= 1");
}

void validate_cvscan(Checker& c) {
  const double lo = c.number("lambda1_min", false, 0.5);
  const double hi = c.number("lambda1_max", false, 50.0);
  const auto points = c.integer("points", false, 20);
  const double sigma1 = c.number("sigma1", false, 1.0);
  const double lambda2 = c.number("lambda2", false, 2.0);
  const double tau_r = c.number("tauR", false, 0.4);
  const double tau_d = c.number("tauD", false, 1.0);
  const double v0 = c.number("V0", false, 1.0);
  if (lo <= 0.0) c.fail("lambda1_min", "must be > 0");
  if (hi <= lo) c.fail("lambda1_max", "must exceed lambda1_min");
  if (points < 2) c.fail("points", "must be >= 2");
  if (sigma1 <= 0.0) c.fail("sigma1", "must be > 0");
  if (lambda2 < 0.0) c.fail("lambda2", "must be >= 0");
  if (tau_r < 0.0) c.fail("tauR", "must be >= 0");
  if (!(tau_r < tau_d)) c.fail("tauR", "constraint tauR < tauD violated");
  if (v0 <= 0.0) c.fail("V0", "must be > 0");
}

}  // namespace

ValidationResult validate_config_json(const std::string& scenario,
                                      const json& raw) {
  ValidationResult res;
  if (!raw.is_object()) {
    res.errors.push_back("top level: expected a JSON object");
    return res;
  }
  Checker c(raw);
  if (scenario == "malthus")
    validate_malthus(c);
  else if (scenario == "planar")
    validate_planar(c);
  else if (scenario == "coupling")
    validate_coupling(c);
  else if (scenario == "branching")
    validate_branching(c);
  else if (scenario == "ifire")
    validate_ifire(c);
  else if (scenario == "gene")
    validate_gene(c);
  else if (scenario == "cvscan")
    validate_cvscan(c);
  else {
    res.errors.push_back("scenario: unknown scenario \"" + scenario + "\"");
    return res;
  }
  c.reject_unknown();
  res.errors = std::move(c.errors);
  res.ok = res.errors.empty();
  if (res.ok) res.config = std::move(c.out);
  return res;
}

ValidationResult validate_config(const std::string& scenario,
                                 const std::filesystem::path& path) {
  ValidationResult res;
  std::ifstream in(path);
  if (!in) {
    res.errors.push_back("config file not found: " + path.string());
    return res;
  }
  json raw;
  try {
    raw = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    // Recover the line number from the byte offset for the error message.
    std::ifstream again(path);
    std::string text((std::istreambuf_iterator<char>(again)),
                     std::istreambuf_iterator<char>());
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
      if (text[i] == '\n') ++line;
    res.errors.push_back("parse error at line " + std::to_string(line) + ": " +
                         e.what());
    return res;
  }
  return validate_config_json(scenario, raw);
}

}  // namespace pdmplab::cli
