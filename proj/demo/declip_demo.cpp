// Clips random measurements of a signal in the unit ball and recovers it by
// cyclic projections. Usage: declip_demo [n] [lambda] [seed]

#include <clipstab/recovery.hpp>
#include <clipstab/scaling.hpp>
#include <clipstab/signal_sets.hpp>

#include <cstdio>
#include <cstdlib>

using namespace clipstab;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20;
  const double lambda = argc > 2 ? std::strtod(argv[2], nullptr) : 0.3;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  MRule rule;
  const std::size_t m = rule.evaluate(lambda, n);
  const Vector u = scaled(sample_point(SignalSet(SetKind::Ball, n), derive_seed(seed, 0)), 0.9);
  const auto x = sample_matrix(MeasurementEnsemble(EnsembleKind::UniformSphere, n), m, derive_seed(seed, 1));
  const auto obs = observe_clipped(x, u, ClipLevel(lambda));

  std::size_t saturated = 0;
  for (int f : obs.saturation_flags) saturated += f != 0;
  std::printf("n=%zu m=%zu lambda=%g, %zu of %zu measurements saturated\n", n, m, lambda, saturated, m);

  PocsOptions opt;
  opt.reference = u;
  const auto res = declip_pocs(x, obs, 2000, 1e-10, opt);
  std::printf("sweeps=%zu converged=%s residual=%.3g\n", res.sweeps, res.converged ? "yes" : "no", res.residual);
  std::printf("relative error %.4g, Fejer violations %zu\n", distance(res.x_hat, u) / norm2(u), res.fejer_violations);

  const auto signs = sign_measurements(x, u);
  const Vector dir = one_bit_estimate(x, signs);
  std::printf("one-bit direction: cos angle to u = %.4f\n", dot(dir, u) / norm2(u));
}
