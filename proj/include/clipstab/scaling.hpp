#pragma once

// Log-log exponent fitting and the sample-size rules m(λ).

#include <clipstab/core.hpp>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace clipstab {

struct LogLogFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log A in y ≈ A x^p
  double rms = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of log y on log x; points with x ≤ 0 or y ≤ 0 are skipped.
inline LogLogFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  require_dimension(ys.size(), xs.size(), "fit_loglog");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  if (lx.size() < 2) throw DegenerateError("fit_loglog: need at least two positive points");
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DegenerateError("fit_loglog: all x values coincide");
  LogLogFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / k);
  fit.points = lx.size();
  return fit;
}

enum class MRuleKind { Explicit, LinearN, LogN, LamInvLog, SparseLamInvLog };

inline std::string_view to_string(MRuleKind k) {
  switch (k) {
    case MRuleKind::Explicit: return "explicit";
    case MRuleKind::LinearN: return "linear_n";
    case MRuleKind::LogN: return "log_n";
    case MRuleKind::LamInvLog: return "lam_inv_log";
    case MRuleKind::SparseLamInvLog: return "sparse_lam_inv_log";
  }
  return "?";
}

inline MRuleKind parse_m_rule(std::string_view s) {
  for (auto k : {MRuleKind::Explicit, MRuleKind::LinearN, MRuleKind::LogN, MRuleKind::LamInvLog,
                 MRuleKind::SparseLamInvLog})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown m rule '" + std::string(s) + "'");
}

inline constexpr double kDefaultMConstant = 10.0;

struct MRule {
  MRuleKind kind = MRuleKind::LamInvLog;
  double C = kDefaultMConstant;
  std::vector<std::size_t> explicit_m;  // one entry per λ, or a single entry used for all

  /// linear_n: ⌈C n⌉; log_n: ⌈C log(1/λ) n⌉; lam_inv_log: ⌈C λ⁻¹ log(1/λ) n⌉;
  /// sparse_lam_inv_log: ⌈C λ⁻¹ log(1/λ) s log(en/s)⌉. Never below 1.
  std::size_t evaluate(double lambda, std::size_t n, std::size_t s = 0, std::size_t index = 0) const {
    const double dn = static_cast<double>(n);
    double m = 0.0;
    switch (kind) {
      case MRuleKind::Explicit:
        if (explicit_m.empty()) throw ConfigError("explicit m rule needs a list of m values");
        return explicit_m.size() == 1 ? explicit_m[0] : explicit_m.at(index);
      case MRuleKind::LinearN: m = std::ceil(C * dn); break;
      case MRuleKind::LogN: m = std::ceil(C * std::log(1.0 / lambda) * dn); break;
      case MRuleKind::LamInvLog: m = std::ceil(C / lambda * std::log(1.0 / lambda) * dn); break;
      case MRuleKind::SparseLamInvLog: {
        const double ds = static_cast<double>(s == 0 ? n : s);
        m = std::ceil(C / lambda * std::log(1.0 / lambda) * ds * std::log(std::exp(1.0) * dn / ds));
        break;
      }
    }
    return m < 1.0 ? 1 : static_cast<std::size_t>(m);
  }
};

/// k log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t k) {
  if (!(lo > 0.0 && hi >= lo) || k == 0) throw ConfigError("log_grid: need 0 < lo <= hi and k >= 1");
  if (k == 1) return {lo};
  std::vector<double> g(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k - 1);
    g[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

}  // namespace clipstab
