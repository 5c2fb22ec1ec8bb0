#pragma once

// Chunked Monte Carlo means. Sample j belongs to chunk j / kChunk; every chunk
// owns an Rng seeded by derive_seed(seed, chunk) and chunk partial sums are
// added in chunk order, so the estimate does not depend on the thread count.

#include <clipstab/core.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/rng.hpp>

#include <cmath>
#include <cstdint>
#include <optional>

namespace clipstab {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_mc = 0;
  std::uint64_t seed = 0;
  std::optional<double> reference;  // exact/quadrature value when available
};

inline constexpr std::int64_t kMcChunk = 16384;

/// Mean of draw(rng) over n_mc samples. Each chunk works on its own copy of
/// draw, so a mutable lambda may carry scratch buffers.
template <class Draw>
McEstimate mc_mean(std::int64_t n_mc, std::uint64_t seed, Draw&& draw) {
  if (n_mc <= 0) throw ConfigError("Monte Carlo sample count must be positive");
  const std::size_t chunks = static_cast<std::size_t>((n_mc + kMcChunk - 1) / kMcChunk);
  struct Partial {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  auto partials = parallel_map<Partial>(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, c));
    auto local = draw;
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n_mc, begin + kMcChunk);
    Partial p;
    for (std::int64_t j = begin; j < end; ++j) {
      const double x = local(rng);
      p.sum += x;
      p.sum_sq += x * x;
    }
    return p;
  });
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : partials) {
    sum += p.sum;
    sum_sq += p.sum_sq;
  }
  const double n = static_cast<double>(n_mc);
  McEstimate out;
  out.estimate = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1.0)) : 0.0;
  out.std_error = std::sqrt(var / n);
  out.n_mc = n_mc;
  out.seed = seed;
  return out;
}

}  // namespace clipstab
