#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include "acsparse/cli/run.hpp"

int main(int argc, char** argv) {
  using namespace acsparse::cli;
  CLI::App app{"Sparse optimal control of Allen-Cahn with dynamic boundary conditions"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"solve-state", "integrate the state system for the configured control"},
      {"optimize", "run the proximal gradient method"},
      {"check-gradient", "compare adjoint gradients and D2J with finite differences"},
      {"check-soc", "optimize, then sample coercivity, growth, Taylor and continuity tests"},
      {"sweep-alpha", "optimize over a list of sparsity parameters"},
      {"audit-assumptions", "audit potentials, domination and weight assumptions"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "seed overriding run.seed");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const RunConfig cfg = load_config(config_path);
    RunOptions opts;
    opts.out = out_dir;
    opts.threads = threads;
    if (chosen->count("--seed") > 0) opts.seed = seed;
    const ResultBundle bundle = run_subcommand(parse_subcommand(chosen->get_name()), cfg, opts);
    std::cout << "wrote " << bundle.files.size() << " files and " << bundle.manifest.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
