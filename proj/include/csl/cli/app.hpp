#pragma once

#include <CLI11.hpp>

#include <iostream>

#include "csl/cli/dispatch.hpp"

namespace csl::cli {

inline std::string usage_text() {
  std::string s = "usage: cslsim <subcommand> [--config FILE] [--seed N] [--n-traj N] [--dt X] [--n-steps N]\n"
                  "                            [--out PATH] [--workers N]\nsubcommands:";
  for (const auto& n : subcommands()) s += " " + n;
  return s + "\n";
}

/// Full command-line entry point.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"CSL collapse-model simulator", "cslsim"};
  std::string subcommand, config_path;
  Overrides flags;
  std::uint64_t seed = 0;
  std::size_t n_traj = 0, n_steps = 0;
  double dt = 0.0;
  std::string out_path;
  unsigned workers = 0;

  app.add_option("subcommand", subcommand, "one of the subcommands listed below")->required();
  app.add_option("--config,-c", config_path, "JSON run configuration");
  auto* o_seed = app.add_option("--seed", seed, "base seed");
  auto* o_ntraj = app.add_option("--n-traj", n_traj, "number of trajectories");
  auto* o_dt = app.add_option("--dt", dt, "time step");
  auto* o_nsteps = app.add_option("--n-steps", n_steps, "number of steps");
  auto* o_out = app.add_option("--out,-o", out_path, "output path prefix");
  auto* o_workers = app.add_option("--workers", workers, "worker threads (default: CSL_WORKERS or all cores)");
  app.footer(usage_text());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "cslsim: " << e.what() << '\n' << usage_text();
    return kConfigFailure;
  }

  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), subcommand) == subs.end()) {
    err << "cslsim: unknown subcommand '" << subcommand << "'\n" << usage_text();
    return kConfigFailure;
  }
  if (o_seed->count()) flags.seed = seed;
  if (o_ntraj->count()) flags.n_traj = n_traj;
  if (o_dt->count()) flags.dt = dt;
  if (o_nsteps->count()) flags.n_steps = n_steps;
  if (o_out->count()) flags.out = out_path;
  if (o_workers->count()) flags.workers = workers;

  RunConfig cfg;
  try {
    const Json doc = config_path.empty() ? Json::object() : load_config_file(config_path);
    cfg = parse_config(doc, subcommand, flags);
  } catch (const Error& e) {
    err << "cslsim " << subcommand << ": " << e.what() << '\n';
    return kConfigFailure;
  }
  return dispatch(cfg, err);
}

}  // namespace csl::cli
