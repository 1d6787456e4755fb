// rvas-design: config-driven experiment runner for rare-variant association
// study design (detection probability, k-ton prediction, cohort simulation,
// fixed-design and fixed-budget power analysis, depth optimization).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rvas/cli/run.hpp"
#include "rvas/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"rvas-design: power-aware design of rare-variant association studies"};
  app.set_version_flag("--version", std::string(rvas::version));

  std::string config_path;
  rvas::cli::RunOptions opt;

  auto* run = app.add_subcommand("run", "execute the experiment described by a JSON config");
  run->add_option("config", config_path, "path to the experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", opt.out_dir, "output directory (overrides config output_path)");
  run->add_option("--threads", opt.threads,
                  "worker threads (overrides RVAS_THREADS and config; output is identical for any "
                  "value)");
  run->add_flag("--print-config", opt.print_config,
                "print the canonical form of the config and exit");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  return rvas::cli::run_main(config_path, opt, std::cerr);
}
