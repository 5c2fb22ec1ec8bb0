#pragma once

// Experiment configuration: a flat key = value text format (INI style, '#'
// comments, comma-separated lists, optional [section] headers ignored) or an
// equivalent flat JSON object. Unknown keys are rejected.

#include <clipstab/core.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/nonlinear_ops.hpp>
#include <clipstab/scaling.hpp>
#include <clipstab/signal_sets.hpp>
#include <clipstab/stability.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace clipstab {

enum class ExperimentKind { LambdaSweep, SampleComplexity, PropertySuite, RecoveryBench, Certify };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::LambdaSweep: return "lambda_sweep";
    case ExperimentKind::SampleComplexity: return "sample_complexity";
    case ExperimentKind::PropertySuite: return "property_suite";
    case ExperimentKind::RecoveryBench: return "recovery_bench";
    case ExperimentKind::Certify: return "certify";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::LambdaSweep, ExperimentKind::SampleComplexity, ExperimentKind::PropertySuite,
                 ExperimentKind::RecoveryBench, ExperimentKind::Certify})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::LambdaSweep;
  std::string name = "sweep";
  EnsembleKind ensemble = EnsembleKind::UniformSphere;
  std::size_t n = 20;
  std::size_t s = 0;
  SetKind set = SetKind::Ball;
  bool boundary_biased = false;
  Nonlinearity nonlinearity = Nonlinearity::Clip;
  Normalization normalization = Normalization::SquaredDistance;
  std::vector<double> lambdas = log_grid(0.05, 0.5, 8);
  MRule m_rule;
  std::size_t budget = 20000;
  std::int64_t n_mc = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: default
  std::string out = ".";
  double max_distance = std::numeric_limits<double>::infinity();
  bool max_distance_per_lambda = false;  // written "1.5L": the cap is 1.5·λ
  bool sharpness = false;       // lambda_sweep: expected colinear limit instead of worst-pair search
  std::size_t trials = 50;      // recovery_bench seeds, complexity probes
  double delta = 0.01;          // certify
  std::size_t n_dirs = 200;     // certify
  double radius = 0.9;          // recovery_bench: u drawn in radius·Ball
  std::size_t iters = 1000;
  double tol = 1e-10;
  std::int64_t property_trials = 1000000;
  std::string fold_variant = "standard";
  std::size_t m_cap = 0;        // sample_complexity upper bracket (0: 100·n)

  MeasurementEnsemble make_ensemble() const { return MeasurementEnsemble(ensemble, n); }
  SignalSet make_set() const { return SignalSet(set, n, s, boundary_biased); }
  StabilityFunctional make_functional(double lambda) const {
    return {nonlinearity, ClipLevel(lambda), normalization};
  }

  void validate() const {
    if (lambdas.empty()) throw ConfigError("lambda grid must not be empty");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (!(lambdas[i] > 0.0)) throw ConfigError("lambda grid must be strictly positive");
      if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ConfigError("lambda grid must be sorted ascending");
    }
    if (n == 0 || budget == 0 || n_mc <= 0 || trials == 0 || n_dirs == 0 || iters == 0 || property_trials <= 0)
      throw ConfigError("counts must be >= 1");
    if (m_rule.kind == MRuleKind::Explicit) {
      if (m_rule.explicit_m.empty()) throw ConfigError("explicit m rule needs m_list");
      if (m_rule.explicit_m.size() != 1 && m_rule.explicit_m.size() != lambdas.size())
        throw ConfigError("m_list must have one entry or one per lambda");
      for (auto m : m_rule.explicit_m)
        if (m == 0) throw ConfigError("m values must be >= 1");
    }
    if (!(m_rule.C > 0.0)) throw ConfigError("m_constant must be positive");
    if (fold_variant != "standard" && fold_variant != "closed_upper")
      throw ConfigError("fold_variant must be standard or closed_upper");
    make_ensemble();
    make_set();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto d = std::stoull(v, &pos, 10);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GridSpec {
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<std::size_t> points;
  bool explicit_list = false;
};

inline void apply_setting(ExperimentConfig& c, GridSpec& grid, const std::string& key, const std::string& v) {
  if (key == "experiment") c.experiment = parse_experiment_kind(v);
  else if (key == "name") c.name = v;
  else if (key == "ensemble") c.ensemble = parse_ensemble_kind(v);
  else if (key == "n") c.n = parse_u64(key, v);
  else if (key == "s") c.s = parse_u64(key, v);
  else if (key == "set") c.set = parse_set_kind(v);
  else if (key == "boundary_biased") c.boundary_biased = parse_bool(key, v);
  else if (key == "nonlinearity") c.nonlinearity = parse_nonlinearity(v);
  else if (key == "normalization") c.normalization = parse_normalization(v);
  else if (key == "lambdas") {
    c.lambdas.clear();
    for (const auto& x : split_list(v)) c.lambdas.push_back(parse_double(key, x));
    grid.explicit_list = true;
  } else if (key == "lambda_min") grid.lo = parse_double(key, v);
  else if (key == "lambda_max") grid.hi = parse_double(key, v);
  else if (key == "lambda_points") grid.points = parse_u64(key, v);
  else if (key == "m_rule") c.m_rule.kind = parse_m_rule(v);
  else if (key == "m_constant") c.m_rule.C = parse_double(key, v);
  else if (key == "m_list") {
    c.m_rule.explicit_m.clear();
    for (const auto& x : split_list(v)) c.m_rule.explicit_m.push_back(parse_u64(key, x));
  } else if (key == "budget") c.budget = parse_u64(key, v);
  else if (key == "n_mc") c.n_mc = static_cast<std::int64_t>(parse_u64(key, v));
  else if (key == "seed") c.seed = parse_u64(key, v);
  else if (key == "threads") c.threads = parse_u64(key, v);
  else if (key == "out") c.out = v;
  else if (key == "max_distance") {
    if (!v.empty() && v.back() == 'L') {
      c.max_distance = parse_double(key, v.substr(0, v.size() - 1));
      c.max_distance_per_lambda = true;
    } else {
      c.max_distance = parse_double(key, v);
    }
  } else if (key == "sharpness") c.sharpness = parse_bool(key, v);
  else if (key == "trials") c.trials = parse_u64(key, v);
  else if (key == "delta") c.delta = parse_double(key, v);
  else if (key == "n_dirs") c.n_dirs = parse_u64(key, v);
  else if (key == "radius") c.radius = parse_double(key, v);
  else if (key == "iters") c.iters = parse_u64(key, v);
  else if (key == "tol") c.tol = parse_double(key, v);
  else if (key == "property_trials") c.property_trials = static_cast<std::int64_t>(parse_u64(key, v));
  else if (key == "fold_variant") c.fold_variant = v;
  else if (key == "m_cap") c.m_cap = parse_u64(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline void finish_grid(ExperimentConfig& c, const GridSpec& g) {
  if (g.explicit_list && (g.lo || g.hi || g.points))
    throw ConfigError("give either lambdas or lambda_min/lambda_max/lambda_points, not both");
  if (g.lo || g.hi || g.points) c.lambdas = log_grid(g.lo.value_or(0.05), g.hi.value_or(0.5), g.points.value_or(8));
}

}  // namespace detail

using ConfigMap = std::vector<std::pair<std::string, std::string>>;

inline ExperimentConfig config_from_pairs(const ConfigMap& pairs) {
  ExperimentConfig c;
  detail::GridSpec grid;
  std::map<std::string, int> seen;
  for (const auto& [k, v] : pairs) {
    if (seen[k]++) throw ConfigError("duplicate config key '" + k + "'");
    detail::apply_setting(c, grid, k, v);
  }
  detail::finish_grid(c, grid);
  c.validate();
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  ConfigMap pairs;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    pairs.emplace_back(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return config_from_pairs(pairs);
}

inline ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config JSON must be an object");
  ConfigMap pairs;
  auto scalar = [](const nlohmann::ordered_json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    }
    throw ConfigError("config JSON values must be scalars or arrays of scalars");
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string value;
    if (it->is_array()) {
      for (const auto& e : *it) value += (value.empty() ? "" : ",") + scalar(e);
    } else {
      value = scalar(*it);
    }
    pairs.emplace_back(it.key(), value);
  }
  return config_from_pairs(pairs);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
  return parse_config_text(text);
}

/// Canonical key = value serialization (every field, fixed order, 17 significant digits).
inline std::string canonical_config(const ExperimentConfig& c) {
  auto num = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::ostringstream o;
  o << "experiment=" << to_string(c.experiment) << "\nname=" << c.name << "\nensemble=" << to_string(c.ensemble)
    << "\nn=" << c.n << "\ns=" << c.s << "\nset=" << to_string(c.set)
    << "\nboundary_biased=" << (c.boundary_biased ? "true" : "false")
    << "\nnonlinearity=" << to_string(c.nonlinearity) << "\nnormalization=" << to_string(c.normalization)
    << "\nlambdas=";
  for (std::size_t i = 0; i < c.lambdas.size(); ++i) o << (i ? "," : "") << num(c.lambdas[i]);
  o << "\nm_rule=" << to_string(c.m_rule.kind) << "\nm_constant=" << num(c.m_rule.C) << "\nm_list=";
  for (std::size_t i = 0; i < c.m_rule.explicit_m.size(); ++i) o << (i ? "," : "") << c.m_rule.explicit_m[i];
  o << "\nbudget=" << c.budget << "\nn_mc=" << c.n_mc << "\nseed=" << c.seed
    << "\nmax_distance=" << num(c.max_distance) << (c.max_distance_per_lambda ? "L" : "")
    << "\nsharpness=" << (c.sharpness ? "true" : "false") << "\ntrials=" << c.trials << "\ndelta=" << num(c.delta)
    << "\nn_dirs=" << c.n_dirs << "\nradius=" << num(c.radius) << "\niters=" << c.iters << "\ntol=" << num(c.tol)
    << "\nproperty_trials=" << c.property_trials << "\nfold_variant=" << c.fold_variant << "\nm_cap=" << c.m_cap
    << "\n";
  return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the configuration; threads and output path do not affect results and are excluded.
inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(canonical_config(c)); }

}  // namespace clipstab
