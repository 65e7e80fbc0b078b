// Command line driver for the experiment suite.

#include "vat/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"variational annealing toolkit"};
  app.require_subcommand(1);

  struct {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 1;
    int workers = 1;
    bool plots = false;
  } args;

  const std::vector<std::pair<std::string, void (*)(const vat::CommandContext&)>>
      commands = {
          {"twoqubit-scan", vat::cmd_twoqubit_scan},
          {"bipartite-scan", vat::cmd_bipartite_scan},
          {"lmg-scan", vat::cmd_lmg_scan},
          {"spinglass-run", vat::cmd_spinglass_run},
          {"spinglass-histogram", vat::cmd_spinglass_histogram},
          {"kappa-report", vat::cmd_kappa_report},
      };

  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config, "config file (key=value sections)");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "base RNG seed");
    sub->add_option("--workers", args.workers, "worker thread count");
    sub->add_flag("--plots", args.plots, "emit SVG plots next to the CSVs");
    auto callback = fn;
    sub->callback([&args, callback] {
      vat::CommandContext ctx;
      if (!args.config.empty()) ctx.cfg = vat::load_config(args.config);
      ctx.out = args.out;
      ctx.seed = args.seed;
      ctx.workers = std::max(1, args.workers);
      ctx.plots = args.plots;
      callback(ctx);
    });
  }

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
