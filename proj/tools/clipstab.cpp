// clipstab: config-driven experiment runner.
//
//   clipstab sweep      --config sweep.ini [--seed S] [--out DIR] [--threads K] [--format csv|json|svg]
//   clipstab complexity --config c.ini
//   clipstab verify     [--config c.ini]      exit 1 if any property fails
//   clipstab recover    [--config c.ini]
//   clipstab certify    [--config c.ini]
//   clipstab report     --input r.csv|r.json --format svg
//
// Exit codes: 0 success, 1 property or runtime failure, 2 configuration error.

#include <clipstab/experiments.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace clipstab;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::string format = "csv";
  std::string input;
};

ExperimentConfig load(const Options& o, ExperimentKind kind) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  c.experiment = kind;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  // explicit flag, then CLIPSTAB_THREADS, then the config value
  if (o.threads) set_thread_count(*o.threads);
  else if (!std::getenv("CLIPSTAB_THREADS") && c.threads) set_thread_count(c.threads);
  c.validate();
  return c;
}

void emit(const ScalingReport& r, const ExperimentConfig& c, const std::string& format) {
  const auto path = emit_report(r, format, c.out);
  std::printf("wrote %s\n", path.c_str());
  if (r.partial) std::printf("partial report: %s\n", r.error.c_str());
}

int run_sweep(const Options& o) {
  const auto c = load(o, ExperimentKind::LambdaSweep);
  const auto r = run_lambda_sweep(c);
  for (const auto& row : r.rows)
    std::printf("lambda=%-10.4g m=%-8zu estimate=%.6g\n", row.lambda, row.m, row.estimate);
  std::printf("exponent=%.4f intercept=%.4f rms=%.4f\n", r.exponent, r.intercept, r.rms);
  emit(r, c, o.format);
  return r.partial ? 1 : 0;
}

int run_complexity(const Options& o) {
  const auto c = load(o, ExperimentKind::SampleComplexity);
  const auto res = run_sample_complexity(c);
  for (const auto& row : res.table.rows)
    std::printf("lambda=%-10.4g minimal_m=%-8zu estimate=%.6g tau=%.6g\n", row.lambda, row.m, row.estimate,
                row.std_error);
  std::printf("reference exponent=%.4f, m exponent=%.4f\n", res.reference.exponent, res.table.exponent);
  emit(res.reference, c, o.format);
  emit(res.table, c, o.format);
  return res.table.partial ? 1 : 0;
}

int run_verify(const Options& o) {
  const auto c = load(o, ExperimentKind::PropertySuite);
  std::vector<PropertyResult> details;
  const auto r = run_property_suite(c, &details);
  bool ok = true;
  for (const auto& p : details) {
    std::printf("%-26s %s  trials=%lld failures=%lld  %.2fs\n", p.name.c_str(), p.passed() ? "PASS" : "FAIL",
                static_cast<long long>(p.trials), static_cast<long long>(p.failures), p.seconds);
    if (p.counterexample) std::printf("    counterexample: %s\n", p.counterexample->c_str());
    ok = ok && p.passed();
  }
  emit(r, c, o.format);
  return ok ? 0 : 1;
}

int run_recover(const Options& o) {
  const auto c = load(o, ExperimentKind::RecoveryBench);
  const auto r = run_recovery_bench(c);
  std::printf("median_relative_error=%.6g fejer_violations=%g\n", r.metric("median_relative_error"),
              r.metric("fejer_violations"));
  emit(r, c, o.format);
  return 0;
}

int run_certify_cmd(const Options& o) {
  const auto c = load(o, ExperimentKind::Certify);
  const auto r = run_certify(c);
  std::printf("delta=%g sup=%.6g (se %.2g) inf=%.6g (se %.2g)\n", c.delta, r.rows[0].estimate, r.rows[0].std_error,
              r.metric("inf_estimate"), r.metric("inf_std_error"));
  emit(r, c, o.format);
  return 0;
}

int run_report(const Options& o) {
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw ConfigError("cannot open report '" + o.input + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto r = first != std::string::npos && text[first] == '{' ? read_json(text) : read_csv(text);
  const auto path = emit_report(r, o.format, o.out.value_or("."));
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clipstab: stability experiments for clipped, folded and one-bit measurements"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "experiment config (INI or JSON)")->check(CLI::ExistingFile);
    if (needs_config) cfg->required();
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json", "svg"}));
  };

  auto* sweep = app.add_subcommand("sweep", "lambda sweep with exponent fit");
  auto* complexity = app.add_subcommand("complexity", "minimal m per lambda by bisection");
  auto* verify = app.add_subcommand("verify", "operator property suite");
  auto* recover = app.add_subcommand("recover", "declipping benchmark");
  auto* certify = app.add_subcommand("certify", "small-ball certification");
  auto* report = app.add_subcommand("report", "re-render a CSV or JSON report");
  add_common(sweep, true);
  add_common(complexity, true);
  add_common(verify, false);
  add_common(recover, false);
  add_common(certify, false);
  report->add_option("--input", o.input, "CSV or JSON report")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "output directory");
  report->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json", "svg"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub != report && sub->count("--seed")) o.seed = seed;
    if (sub->count("--out")) o.out = out;
    if (sub != report && sub->count("--threads")) o.threads = threads;
  }

  try {
    if (*sweep) return run_sweep(o);
    if (*complexity) return run_complexity(o);
    if (*verify) return run_verify(o);
    if (*recover) return run_recover(o);
    if (*certify) return run_certify_cmd(o);
    if (*report) return run_report(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
