// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "sqp/config.hpp"
#include "sqp/errors.hpp"
#include "sqp/io.hpp"
#include "sqp/scenario.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;
constexpr int kAcceptanceFailure = 4;

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (defaults to outputs.directory)");
  cmd->add_option("--override", c.overrides, "section.key=value, repeatable");
}

int run(const Common& c, const sqp::Stages& stages, const std::string& name) {
  const auto cfg = sqp::load_config(c.config, c.overrides);
  const std::filesystem::path out = c.out.empty() ? cfg.outputs.directory : c.out;
  const auto manifest = sqp::run_scenario(cfg, out, stages, name);
  std::cout << "wrote " << manifest["artifacts"].size() << " artifacts to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical quasiparticle simulations"};
  app.set_version_flag("--version", SQP_VERSION);
  app.require_subcommand(1);

  Common he, evolve, reference, compare, scan;
  add_common(app.add_subcommand("he", "integrate the Hamilton-Ehrenfest system"), he);
  add_common(app.add_subcommand("evolve", "assemble the semiclassical wave function"), evolve);
  add_common(app.add_subcommand("reference", "run the split-step reference solver"), reference);
  add_common(app.add_subcommand("compare", "run every stage and compare"), compare);

  auto* scan_cmd = app.add_subcommand("scan-hbar", "semiclassical error against the reference for several hbar");
  add_common(scan_cmd, scan);
  std::vector<double> hbars{0.4, 0.2, 0.1, 0.05};
  scan_cmd->add_option("--hbar", hbars, "hbar values")->delimiter(',');

  auto* period_cmd = app.add_subcommand("period", "oscillation period of a CSV column");
  std::string csv, column = "X_1";
  double expect = 0.0, tolerance = 0.05;
  period_cmd->add_option("--csv", csv, "series file with a 't' column")->required()->check(CLI::ExistingFile);
  period_cmd->add_option("--column", column, "column to analyse");
  period_cmd->add_option("--expect", expect, "expected period; exit 4 when off by more than --tolerance");
  period_cmd->add_option("--tolerance", tolerance, "relative tolerance for --expect");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("he")) return run(he, {.he = true}, "he");
    if (app.got_subcommand("evolve")) return run(evolve, {.he = true, .evolution = true}, "evolve");
    if (app.got_subcommand("reference")) return run(reference, {.reference = true}, "reference");
    if (app.got_subcommand("compare"))
      return run(compare, {.he = true, .evolution = true, .reference = true, .compare = true}, "compare");
    if (app.got_subcommand("scan-hbar")) {
      const auto cfg = sqp::load_config(scan.config, scan.overrides);
      const auto result = sqp::hbar_scan(cfg, hbars);
      const std::filesystem::path out = scan.out.empty() ? cfg.outputs.directory : scan.out;
      std::filesystem::create_directories(out);
      sqp::CsvWriter w(out / "hbar_scan.csv", {"hbar", "l2_rel0", "l2_rel1", "correction_ratio"});
      for (const auto& r : result.rows) {
        w.row({r.hbar, r.l2_rel0, r.l2_rel1, r.correction_ratio});
        std::printf("hbar=%-8g l2_rel0=%.6e l2_rel1=%.6e ratio=%.6e\n", r.hbar, r.l2_rel0, r.l2_rel1,
                    r.correction_ratio);
      }
      std::printf("decreasing=%s correction_helps=%s\n", result.decreasing ? "yes" : "no",
                  result.correction_helps ? "yes" : "no");
      return result.decreasing ? 0 : kAcceptanceFailure;
    }
    if (app.got_subcommand("period")) {
      const double T = sqp::period_estimate(csv, column);
      std::printf("%.10g\n", T);
      if (expect > 0.0 && std::abs(T - expect) > tolerance * expect) return kAcceptanceFailure;
      return 0;
    }
  } catch (const sqp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const sqp::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const sqp::InsufficientOscillations& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kAcceptanceFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
