// Command-line front end: scenario runs and the verification subcommands.

#include <CLI11.hpp>

#include <iostream>

#include "dgflow/driver.hpp"

using namespace dgflow;

int main(int argc, char** argv) {
  CLI::App app{"phase-field mean curvature flow simulator and verifier"};
  app.require_subcommand(1);

  int threads = 1;
  std::string out_dir = "out";
  int64_t seed = -1;
  app.add_option("--threads", threads, "worker threads for independent tasks");
  app.add_option("--out-dir", out_dir, "run archive directory");
  app.add_option("--seed", seed, "override the scenario seed");

  std::string config_path, archive_dir, which;
  double radius = 0.125;
  int levels = 1;

  auto* cmd_run = app.add_subcommand("run", "execute a scenario into an archive");
  cmd_run->add_option("-c,--config", config_path, "scenario config")->required();

  auto* cmd_tensions = app.add_subcommand("tensions", "surface tension matrix as CSV + summary");
  cmd_tensions->add_option("-c,--config", config_path, "scenario config")->required();

  auto* cmd_localize = app.add_subcommand("localize", "ball-covering two-phase reduction error");
  cmd_localize->add_option("--archive", archive_dir, "run archive")->required();
  cmd_localize->add_option("--radius", radius, "largest covering radius");
  cmd_localize->add_option("--levels", levels, "number of radius halvings");

  auto* cmd_bv = app.add_subcommand("verify-bv", "certify the BV solution conditions");
  cmd_bv->add_option("--archive", archive_dir, "run archive")->required();

  auto* cmd_var = app.add_subcommand("verify-varifold", "varifold compatibility and dissipation");
  cmd_var->add_option("--archive", archive_dir, "run archive")->required();

  auto* cmd_report = app.add_subcommand("report", "print an archived report");
  cmd_report->add_option("--archive", archive_dir, "run archive")->required();
  cmd_report->add_option("which", which, "ledger | bv | varifold | localize")->required();

  CLI11_PARSE(app, argc, argv);

  RunOptions opts;
  opts.threads = threads;
  if (seed >= 0) opts.seed = static_cast<uint64_t>(seed);

  try {
    if (cmd_run->parsed()) {
      Scenario s;
      try {
        s = Scenario::from_config(Config::load(config_path));
      } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (e.line > 0) std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.what() << "\n";
        return 2;
      }
      return run_scenario(s, out_dir, opts);
    }
    if (cmd_tensions->parsed()) {
      Scenario s;
      try {
        s = Scenario::from_config(Config::load(config_path));
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      return emit_tensions(s, threads, std::cout);
    }
    if (cmd_localize->parsed()) {
      RunArchive archive{archive_dir};
      auto out = localize(archive, radius, levels, threads);
      std::cout << "radius,total_error,surrogate_total\n";
      for (const auto& lv : out)
        std::cout << lv.radius << "," << lv.total_error << "," << lv.surrogate_total << "\n";
      std::cout << "cx0,cx1,pair_i,pair_j,nuB0,nuB1,error\n";
      if (!out.empty())
        for (const auto& b : out.back().detail.balls)
          std::cout << b.center[0] << "," << b.center[1] << "," << b.phase_i + 1 << ","
                    << b.phase_j + 1 << "," << b.nu[0] << "," << b.nu[1] << "," << b.error << "\n";
      return 0;
    }
    if (cmd_bv->parsed()) {
      RunArchive archive{archive_dir};
      BvReport rep = verify_bv(archive, threads);
      return emit_report(archive, "bv");
    }
    if (cmd_var->parsed()) {
      RunArchive archive{archive_dir};
      verify_varifold(archive, threads);
      return emit_report(archive, "varifold");
    }
    if (cmd_report->parsed()) {
      RunArchive archive{archive_dir};
      return emit_report(archive, which);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dgflow: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
