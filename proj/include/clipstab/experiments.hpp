#pragma once

// Config-driven experiments. Grid point g always uses the sub-seed
// derive_seed(master, g), so results do not depend on scheduling.

#include <clipstab/config.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/probability.hpp>
#include <clipstab/properties.hpp>
#include <clipstab/recovery.hpp>
#include <clipstab/report.hpp>
#include <clipstab/scaling.hpp>
#include <clipstab/stability.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace clipstab {

inline ScalingReport make_report(const ExperimentConfig& c) {
  ScalingReport r;
  r.experiment = c.name;
  r.config_hash = config_hash(c);
  r.master_seed = c.seed;
  return r;
}

inline SearchOptions search_options_for(const ExperimentConfig& c, double lambda) {
  SearchOptions opt;
  if (std::isfinite(c.max_distance)) opt.max_distance = c.max_distance_per_lambda ? c.max_distance * lambda : c.max_distance;
  return opt;
}

/// One worst-pair estimate at a given λ and m, with its own seed.
inline StabilityEstimate sweep_point(const ExperimentConfig& c, double lambda, std::size_t m, std::uint64_t seed) {
  const auto x = sample_matrix(c.make_ensemble(), m, derive_seed(seed, 0));
  return worst_pair_search(x, c.make_set(), c.make_functional(lambda), c.budget, derive_seed(seed, 1),
                           search_options_for(c, lambda));
}

inline ScalingReport run_lambda_sweep(const ExperimentConfig& c) {
  c.validate();
  ScalingReport r = make_report(c);
  const std::size_t k = c.lambdas.size();
  r.rows.resize(k);
  if (c.sharpness) {
    const std::size_t m = c.m_rule.evaluate(c.lambdas.front(), c.n, c.s, 0);
    const auto means = expected_sharpness_scan(c.n, c.lambdas, m, c.n_mc, c.seed, c.ensemble);
    for (std::size_t g = 0; g < k; ++g)
      r.rows[g] = {c.lambdas[g], m, c.n, means[g].estimate, means[g].std_error, c.seed};
  } else {
    std::vector<std::string> errors(k);
    parallel_for(k, [&](std::size_t g) {
      const double lambda = c.lambdas[g];
      const std::size_t m = c.m_rule.evaluate(lambda, c.n, c.s, g);
      const std::uint64_t sub = derive_seed(c.seed, g);
      r.rows[g] = {lambda, m, c.n, std::numeric_limits<double>::quiet_NaN(), 0.0, sub};
      try {
        r.rows[g].estimate = sweep_point(c, lambda, m, sub).value;
      } catch (const Error& e) {
        errors[g] = e.what();
      }
    });
    for (std::size_t g = 0; g < k; ++g)
      if (!errors[g].empty()) {
        r.partial = true;
        if (r.error.empty()) r.error = "lambda index " + std::to_string(g) + ": " + errors[g];
      }
    if (r.partial) {
      // keep only the rows that completed
      std::vector<ReportRow> done;
      for (std::size_t g = 0; g < k; ++g)
        if (errors[g].empty()) done.push_back(r.rows[g]);
      r.rows = std::move(done);
    }
  }
  try {
    r.fit();
  } catch (const DegenerateError&) {
    // fewer than two positive estimates: exponent stays NaN
  }
  return r;
}

struct ComplexityResult {
  ScalingReport reference;  // the sweep that defines τ(λ)
  ScalingReport table;      // rows: λ, minimal m, estimate at that m
};

/// Minimal m with estimate(m) ≥ τ(λ) = ½·A·λ^p (A, p fitted on the reference sweep),
/// by bisection on log m between n and the cap. Probe at m uses seed derive_seed(sub, m).
inline ComplexityResult run_sample_complexity(const ExperimentConfig& c) {
  c.validate();
  ComplexityResult out;
  out.reference = run_lambda_sweep(c);
  if (!std::isfinite(out.reference.exponent)) throw DegenerateError("sample complexity: reference fit failed");
  out.table = make_report(c);
  out.table.experiment = c.name + "_complexity";
  const std::size_t cap = c.m_cap ? c.m_cap : 100 * c.n;
  const std::size_t k = c.lambdas.size();
  out.table.rows.resize(k);
  std::vector<int> flagged(k, 0);
  parallel_for(k, [&](std::size_t g) {
    const double lambda = c.lambdas[g];
    const double tau = 0.5 * std::exp(out.reference.intercept) * std::pow(lambda, out.reference.exponent);
    const std::uint64_t sub = derive_seed(derive_seed(c.seed, 0xC0C0ULL), g);
    auto probe = [&](std::size_t m) { return sweep_point(c, lambda, m, derive_seed(sub, m)).value; };
    std::size_t lo = std::max<std::size_t>(1, c.n / 2);
    std::size_t hi = cap;
    const double at_hi = probe(hi);
    if (at_hi < tau) {
      flagged[g] = 1;
      out.table.rows[g] = {lambda, hi, c.n, at_hi, tau, sub};
      return;
    }
    double best = at_hi;
    if (probe(lo) >= tau) {
      out.table.rows[g] = {lambda, lo, c.n, probe(lo), tau, sub};
      return;
    }
    while (hi - lo > std::max<std::size_t>(1, lo / 50)) {
      const auto mid = static_cast<std::size_t>(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi)));
      const std::size_t m = std::clamp(mid, lo + 1, hi - 1);
      const double v = probe(m);
      if (v >= tau) {
        hi = m;
        best = v;
      } else {
        lo = m;
      }
    }
    out.table.rows[g] = {lambda, hi, c.n, best, tau, sub};
  });
  for (std::size_t g = 0; g < k; ++g)
    if (flagged[g]) {
      out.table.partial = true;
      out.table.error = "bisection bracket failed at lambda index " + std::to_string(g);
    }
  std::vector<double> ls;
  std::vector<double> ms;
  for (std::size_t g = 0; g < k; ++g) {
    const auto& row = out.table.rows[g];
    const double ratio = static_cast<double>(row.m) * row.lambda / (static_cast<double>(c.n) * std::log(1.0 / row.lambda));
    out.table.metrics.emplace_back("ratio_" + std::to_string(g), ratio);
    ls.push_back(row.lambda);
    ms.push_back(static_cast<double>(row.m));
  }
  try {
    const auto f = fit_loglog(ls, ms);
    out.table.exponent = f.exponent;
    out.table.intercept = f.intercept;
    out.table.rms = f.rms;
  } catch (const DegenerateError&) {
  }
  return out;
}

/// Property suite as a report: one row per property with estimate = failure count.
inline ScalingReport run_property_suite(const ExperimentConfig& c, std::vector<PropertyResult>* details = nullptr) {
  c.validate();
  PropertyOptions opt;
  opt.trials = c.property_trials;
  opt.seed = c.seed;
  opt.fold = c.fold_variant == "closed_upper" ? FoldVariant::ClosedUpper : FoldVariant::Standard;
  auto results = run_operator_properties(opt);
  ScalingReport r = make_report(c);
  double failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    r.rows.push_back({0.0, static_cast<std::size_t>(results[i].trials), i, static_cast<double>(results[i].failures), 0.0,
                      c.seed});
    r.metrics.emplace_back(results[i].name, static_cast<double>(results[i].failures));
    if (!results[i].passed()) failed += 1;
  }
  r.metrics.emplace_back("failed_properties", failed);
  if (details) *details = std::move(results);
  return r;
}

/// Declipping benchmark: one row per seed with estimate = ‖x̂ − u‖/‖u‖ and std_error = residual.
inline ScalingReport run_recovery_bench(const ExperimentConfig& c) {
  c.validate();
  ScalingReport r = make_report(c);
  const double lambda = c.lambdas.front();
  const std::size_t m = c.m_rule.evaluate(lambda, c.n, c.s, 0);
  const SignalSet ball(SetKind::Ball, c.n);
  struct Outcome {
    double rel = 0.0;
    double residual = 0.0;
    std::size_t violations = 0;
    std::uint64_t seed = 0;
  };
  auto outcomes = parallel_map<Outcome>(c.trials, [&](std::size_t t) {
    const std::uint64_t sub = derive_seed(c.seed, t);
    Vector u = sample_point(ball, derive_seed(sub, 0));
    for (double& e : u) e *= c.radius;
    const auto x = sample_matrix(c.make_ensemble(), m, derive_seed(sub, 1));
    const auto obs = observe_clipped(x, u, ClipLevel(lambda));
    PocsOptions po;
    po.reference = u;
    const auto res = declip_pocs(x, obs, c.iters, c.tol, po);
    const double nu = norm2(u);
    return Outcome{nu > 0 ? distance(res.x_hat, u) / nu : distance(res.x_hat, u), res.residual, res.fejer_violations, sub};
  });
  Vector rels;
  double violations = 0;
  for (const auto& o : outcomes) {
    r.rows.push_back({lambda, m, c.n, o.rel, o.residual, o.seed});
    rels.push_back(o.rel);
    violations += static_cast<double>(o.violations);
  }
  std::sort(rels.begin(), rels.end());
  const std::size_t h = rels.size() / 2;
  const double median = rels.size() % 2 ? rels[h] : 0.5 * (rels[h - 1] + rels[h]);
  r.metrics.emplace_back("median_relative_error", median);
  r.metrics.emplace_back("fejer_violations", violations);
  return r;
}

/// Small-ball certification at δ = c.delta: the row holds the sup estimate; the inf goes to the metrics.
inline ScalingReport run_certify(const ExperimentConfig& c) {
  c.validate();
  ScalingReport r = make_report(c);
  const auto cert = certify_small_ball(c.make_ensemble(), c.delta, c.n_mc, c.n_dirs, c.seed);
  r.rows.push_back({c.delta, static_cast<std::size_t>(c.n_mc), c.n, cert.sup_estimate.estimate,
                    cert.sup_estimate.std_error, c.seed});
  r.metrics.emplace_back("inf_estimate", cert.inf_estimate.estimate);
  r.metrics.emplace_back("inf_std_error", cert.inf_estimate.std_error);
  return r;
}

}  // namespace clipstab
