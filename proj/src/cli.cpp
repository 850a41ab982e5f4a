#include "usc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "usc/errors.hpp"
#include "usc/harness/config.hpp"
#include "usc/harness/experiment.hpp"

namespace usc {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolation = 2;

void WriteText(const std::string& dir, const std::string& name, const std::string& text) {
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

std::string FormatRunReport(const harness::RunTrace& trace, const harness::BoundReport& report) {
  using harness::FormatNumber;
  std::ostringstream out;
  out << "stream " << ToString(trace.stream_class);
  if (trace.stream_class != StreamClass::kConvex) out << " parameter=" << FormatNumber(trace.true_parameter);
  out << "  T=" << trace.rounds() << "  d=" << trace.dim << "  K=" << trace.num_experts()
      << "  G=" << FormatNumber(trace.grad_bound) << "  D=" << FormatNumber(trace.diameter) << '\n';
  out << "comparator loss " << FormatNumber(trace.comparator_loss) << "  gradient mapping "
      << FormatNumber(trace.comparator_gradient_mapping) << '\n';
  out << "usc regret " << FormatNumber(trace.UscRegret()) << '\n';
  for (size_t i = 0; i < trace.num_experts(); ++i) {
    const auto& e = trace.experts[i];
    out << "  expert " << i << ' ' << e.name;
    if (e.expert_class != ExpertClass::kConvex) out << '@' << FormatNumber(e.parameter);
    out << " regret " << FormatNumber(trace.ExpertRegret(i)) << '\n';
  }
  for (const auto& b : trace.baselines) {
    out << "  baseline " << b.expert.name;
    if (b.expert.expert_class != ExpertClass::kConvex) out << '@' << FormatNumber(b.expert.parameter);
    out << " regret " << FormatNumber(b.regret) << '\n';
  }
  out << '\n' << report.Format();
  return out.str();
}

int CliMain(int argc, char** argv) {
  CLI::App app{"Universal online convex optimization: runs, bound checks and scaling sweeps"};
  app.require_subcommand(1);

  std::string config_path, trace_dir, out_dir, horizons_text;
  std::uint64_t seed = 0;
  int multi_seed = 1, jobs = 1;
  bool strict = false;

  auto* run = app.add_subcommand("run", "run one experiment, write CSVs and report.txt");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--seed", seed, "stream seed (overrides the config)");
  run->add_flag("--strict", strict, "exact comparisons, no rounding allowance");

  auto* verify = app.add_subcommand("verify", "re-check bounds from a trace directory");
  verify->add_option("trace-dir", trace_dir, "directory written by run")->required();
  verify->add_flag("--strict", strict, "exact comparisons, no rounding allowance");

  auto* sweep = app.add_subcommand("sweep", "regret-vs-T scaling table");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--horizons", horizons_text, "e.g. 2^8..2^14 or 256,1024")->required();
  sweep->add_option("--out", out_dir, "output directory (overrides the config)");
  sweep->add_option("--seed", seed, "first stream seed (overrides the config)");
  sweep->add_option("--multi-seed", multi_seed, "seeds per horizon; the median is reported")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    const ExpertRegistry registry = ExpertRegistry::WithBuiltins();
    if (verify->parsed()) {
      const harness::RunTrace trace = harness::ReadTrace(trace_dir);
      const harness::BoundReport report = harness::VerifyBounds(trace, {strict});
      std::cout << report.Format();
      return report.AllPass() ? kExitOk : kExitViolation;
    }

    harness::ExperimentConfig cfg = harness::LoadConfig(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if ((run->parsed() ? run : sweep)->count("--seed") > 0) cfg.stream.seed = seed;

    if (run->parsed()) {
      const harness::RunTrace trace = harness::RunExperiment(cfg, registry);
      harness::WriteTrace(cfg.output_dir, trace);
      const harness::BoundReport report = harness::VerifyBounds(trace, {strict});
      const std::string text = FormatRunReport(trace, report);
      WriteText(cfg.output_dir, "report.txt", text);
      std::cout << text;
      return report.AllPass() ? kExitOk : kExitViolation;
    }

    harness::SweepOptions opts;
    opts.horizons = harness::ParseHorizons(horizons_text);
    opts.seeds = multi_seed;
    opts.jobs = jobs;
    const harness::SweepResult res = harness::RunSweep(cfg, registry, opts);
    harness::WriteSweep(cfg.output_dir, res);
    const std::string text = res.Format();
    WriteText(cfg.output_dir, "report.txt", text);
    std::cout << text;
    return res.pass ? kExitOk : kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace usc
