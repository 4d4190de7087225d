#include <CLI11.hpp>

#include "qreadout/cli.hpp"

namespace cli = qreadout::cli;

int main(int argc, char** argv) {
  CLI::App app{"Local-state readout simulator"};
  app.require_subcommand(1);

  cli::RunOptions run_opt;
  std::string run_path;
  std::string format;
  std::uint64_t seed = 0;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed (overrides the file)");
    sub->add_option("--out", run_opt.out, "output directory");
    sub->add_option("--format", format, "csv, jsonl or both")->check(CLI::IsMember({"csv", "jsonl", "both"}));
    sub->add_option("--precision", run_opt.precision, "readout precision: eps or inf");
    sub->add_option("--set", run_opt.overrides, "parameter override key=value (repeatable)");
  };

  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("file", run_path, "scenario file")->required();
  add_run_flags(run);

  cli::SweepOptions sweep_opt;
  std::string sweep_path;
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  sweep->add_option("file", sweep_path, "scenario file")->required();
  sweep->add_option("--grid", sweep_opt.grid, "axis key=v1,v2,... (repeatable)")->required();
  sweep->add_option("--jobs", sweep_opt.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_run_flags(sweep);

  cli::VerifyOptions verify_opt;
  std::string counterexample;
  auto* verify = app.add_subcommand("verify", "no-signalling search and invariant suite");
  verify->add_option("--family-size", verify_opt.family_size, "number of random scenarios");
  verify->add_option("--max-qubits", verify_opt.max_qubits, "qubits per scenario (2..4)");
  verify->add_option("--max-measurements", verify_opt.max_measurements, "measurements per scenario");
  verify->add_option("--seed", verify_opt.seed, "master seed");
  verify->add_flag("--inject-fault", verify_opt.inject_fault, "condition on spacelike collapses (self-test)");
  verify->add_flag("--skip-invariants", verify_opt.skip_invariants, "only run the no-signalling search");
  verify->add_option("--replay", verify_opt.replay, "re-check a saved counterexample");
  verify->add_option("--counterexample", verify_opt.counterexample_out, "write a failing case here");

  app.add_subcommand("list-scenarios", "list scenarios and their default parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::Exit::parse_error;
  }

  auto finish_run_flags = [&](CLI::App* sub) {
    if (sub->count("--seed")) run_opt.seed = seed;
    if (!format.empty()) run_opt.format = cli::parse_format(format);
  };

  if (*run) {
    finish_run_flags(run);
    return cli::cmd_run(run_path, run_opt, std::cout, std::cerr);
  }
  if (*sweep) {
    finish_run_flags(sweep);
    sweep_opt.run = run_opt;
    return cli::cmd_sweep(sweep_path, sweep_opt, std::cout, std::cerr);
  }
  if (*verify) return cli::cmd_verify(verify_opt, std::cout, std::cerr);
  return cli::cmd_list(std::cout);
}
