// Command-line driver: all subcommands read one config file, optionally
// patched by repeatable --override section.key=value flags.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 missing prerequisite artifact.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "koopqg/errors.hpp"
#include "koopqg/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "path to the run config")
      ->required();
  cmd->add_option("--override", args.overrides,
                  "section.key=value override (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-Koopman ensemble forecasting on a quasi-geostrophic testbed"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<double> average_times;

  auto* spinup = app.add_subcommand("spinup", "base trajectory and POD snapshots");
  auto* ensemble = app.add_subcommand("ensemble", "training and test ensembles");
  auto* koopman = app.add_subcommand("koopman", "generator spectrum CSV");
  koopman->add_option("--average-times", average_times,
                      "extra anchor times for |omega| averaging (experimental)")
      ->delimiter(',');
  auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov exponent CSVs");
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruction error CSV");
  auto* assimilate = app.add_subcommand("assimilate", "swath DA error CSV");
  for (auto* cmd : {spinup, ensemble, koopman, lyapunov, reconstruct, assimilate})
    add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);

  try {
    const kqg::RunConfig cfg = kqg::parse_config(args.config_path, args.overrides);
    if (spinup->parsed()) kqg::pipeline::cmd_spinup(cfg);
    if (ensemble->parsed()) kqg::pipeline::cmd_ensemble(cfg);
    if (koopman->parsed()) kqg::pipeline::cmd_koopman(cfg, average_times);
    if (lyapunov->parsed()) kqg::pipeline::cmd_lyapunov(cfg);
    if (reconstruct->parsed()) kqg::pipeline::cmd_reconstruct(cfg);
    if (assimilate->parsed()) kqg::pipeline::cmd_assimilate(cfg);
  } catch (const kqg::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const kqg::missing_artifact& e) {
    std::fprintf(stderr, "missing prerequisite: %s\n", e.what());
    return 4;
  } catch (const kqg::numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
