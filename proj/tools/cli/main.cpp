#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using chaplygin::cli::Command;

  CLI::App app{"chaplygin-kit: reduced dynamics, invariant measures and Hamiltonisation of "
               "nonholonomic Chaplygin systems"};
  app.require_subcommand(1);

  std::string config;
  unsigned threads = 0;
  std::uint64_t seed = 12345;

  struct Entry {
    const char* name;
    const char* help;
    Command cmd;
  };
  const Entry entries[] = {
      {"simulate", "integrate the reduced equations and write a trajectory CSV", Command::kSimulate},
      {"diagnose", "measure and phi-simplicity diagnostics as a JSON report", Command::kDiagnose},
      {"hamiltonise", "Chaplygin Hamiltonisation with a symplectic integrator",
       Command::kHamiltonise},
      {"emit-plot", "write a gnuplot script for a trajectory CSV", Command::kEmitPlot},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("--config", config, "run configuration (JSON)")->required();
    sub->add_option("--threads", threads, "worker threads, 0 = all cores");
    sub->add_option("--seed", seed, "seed for randomly sampled diagnostic states");
    subs.emplace_back(sub, e.cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : chaplygin::cli::kExitConfig;
  }

  chaplygin::cli::CommandContext ctx;
  ctx.threads = threads;
  ctx.seed = seed;
  ctx.out = &std::cout;
  ctx.err = &std::cerr;
  for (const auto& [sub, cmd] : subs) {
    if (sub->parsed()) return chaplygin::cli::run_command(cmd, config, ctx);
  }
  return chaplygin::cli::kExitConfig;
}
