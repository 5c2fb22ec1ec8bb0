// Worst-pair clip functional on the ball against the expected colinear limit,
// over a small lambda grid. Usage: sharpness_demo [n] [seed]

#include <clipstab/scaling.hpp>
#include <clipstab/stability.hpp>

#include <cstdio>
#include <cstdlib>

using namespace clipstab;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 10;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
  const auto lambdas = log_grid(0.05, 0.5, 5);
  const auto mean = expected_sharpness_scan(n, lambdas, 1000, 200, derive_seed(seed, 0));

  std::vector<double> found;
  std::printf("%-10s %-8s %-14s %-14s\n", "lambda", "m", "worst pair", "mean colinear");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    MRule rule;
    const std::size_t m = rule.evaluate(lambdas[k], n);
    const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, n), m, derive_seed(seed, 10 + k));
    const auto est = worst_pair_search(x, SignalSet(SetKind::Ball, n),
                                       {Nonlinearity::Clip, ClipLevel(lambdas[k]), Normalization::SquaredDistance}, 5000,
                                       derive_seed(seed, 20 + k));
    found.push_back(est.value);
    std::printf("%-10.4g %-8zu %-14.6g %-14.6g (%s)\n", lambdas[k], m, est.value, mean[k].estimate, est.source.c_str());
  }
  std::vector<double> means;
  for (const auto& e : mean) means.push_back(e.estimate);
  std::printf("fitted exponents: worst pair %.3f, colinear mean %.3f\n", fit_loglog(lambdas, found).exponent,
              fit_loglog(lambdas, means).exponent);
}
