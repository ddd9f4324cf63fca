// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqp/config.hpp"
#include "sqp/evolution.hpp"
#include "sqp/reference_solver.hpp"

namespace sqp {

/// Trajectories plus per-particle M-matrix and phase, ready for assembly.
struct SemiclassicalRun {
  std::unique_ptr<ModelSymbols> model;
  std::vector<GaussianParams> gaussians;
  HeSeries traj;
  std::vector<MSeries> m;
  std::vector<ActionSeries> phase;
  int quad_steps = 200;

  /// Ψ^(0) (and Ψ^(1) when `correction`) summed over particles on `x`.
  AsymptoticSolution solution(const Eigen::VectorXd& x, double t, bool correction,
                              const EvolutionOptions& opt = {}) const;
};

SemiclassicalRun build_semiclassical(const ScenarioConfig& cfg, bool with_propagators);

ReferenceParams reference_params(const ScenarioConfig& cfg);
/// Sum of the particles' Gaussians on the reference grid.
ComplexField initial_field(const ScenarioConfig& cfg, const Grid1D& grid);

struct Stages {
  bool he = false;
  bool evolution = false;
  bool reference = false;
  bool compare = false;
};

/// Runs the requested stages in order (disabled evolution/reference sections
/// are skipped), writes artifacts under `out_dir` and returns the manifest,
/// which is also written as `manifest.json`. On a stage failure the manifest
/// records it and the exception propagates.
nlohmann::json run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            const Stages& stages, const std::string& command = "compare");

struct ScanRow {
  double hbar = 0.0;
  double l2_rel0 = 0.0;
  double l2_rel1 = 0.0;
  /// ‖√ħΨ^(1)‖ / ‖Ψ^(0)‖.
  double correction_ratio = 0.0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  bool decreasing = false;
  bool correction_helps = false;
};

/// Compares the semiclassical solution with the reference solver at he.t_end
/// for every ħ. The reference grid must resolve the narrowest √ħ width with
/// at least 16 points.
ScanResult hbar_scan(const ScenarioConfig& cfg, const std::vector<double>& hbars);

/// Mean of the spacings between successive upward zero crossings of the
/// mean-removed signal (linear interpolation between samples).
double period_estimate(const std::vector<double>& t, const std::vector<double>& values);
double period_estimate(const std::filesystem::path& csv, const std::string& column);

}  // namespace sqp
