// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/scenario.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "sqp/errors.hpp"
#include "sqp/io.hpp"

#ifndef SQP_VERSION
#define SQP_VERSION "unknown"
#endif

namespace sqp {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json config_json(const ScenarioConfig& c) {
  json j;
  j["model"] = {{"name", c.model.name},
                {"params", c.model.params},
                {"kappa", c.model.kappa},
                {"lambda", c.model.lambda},
                {"hbar", c.model.hbar},
                {"moments", c.model.normalized_moments ? "normalized" : "unnormalized"}};
  j["particles"] = json::array();
  for (const auto& p : c.particles)
    j["particles"].push_back({{"N", p.N}, {"gamma", p.gamma}, {"X0", p.X0}, {"P0", p.P0}});
  j["he"] = {{"order", c.he.order},
             {"even_reduction", c.he.even_reduction},
             {"dt", c.he.dt},
             {"t_end", c.he.t_end},
             {"collision_threshold", c.he.collision_threshold}};
  j["evolution"] = {{"enabled", c.evolution.enabled},       {"x_min", c.evolution.x_min},
                    {"x_max", c.evolution.x_max},           {"x_points", c.evolution.x_points},
                    {"correction", c.evolution.correction}, {"quad_steps", c.evolution.quad_steps},
                    {"times", c.evolution.times}};
  j["reference"] = {{"enabled", c.reference.enabled},
                    {"L", c.reference.L},
                    {"npoints", c.reference.npoints},
                    {"dt", c.reference.dt},
                    {"partition", c.reference.partition}};
  j["outputs"] = {{"directory", c.outputs.directory},
                  {"sample_every", c.outputs.sample_every},
                  {"emit", c.outputs.emit}};
  return j;
}

std::vector<double> snapshot_times(const ScenarioConfig& c) {
  if (!c.evolution.times.empty()) return c.evolution.times;
  return {c.he.t_end};
}

Eigen::VectorXd linspace(double a, double b, int n) { return Eigen::VectorXd::LinSpaced(n, a, b); }

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct ReferenceOutcome {
  Grid1D grid;
  std::vector<ComplexField> snapshots;
  std::vector<Observables> series;
  ComplexField final_field;
  double worst_norm_drift = 0.0;
};

ReferenceOutcome run_reference(const ScenarioConfig& cfg, const std::vector<double>& times) {
  ReferenceOutcome out;
  out.grid = Grid1D(cfg.reference.L, cfg.reference.npoints);
  const SplitStepSolver solver(out.grid, reference_params(cfg));
  ComplexField f = initial_field(cfg, out.grid);
  const double t_end = cfg.he.t_end;
  const auto steps = std::max(1L, static_cast<long>(std::llround(t_end / cfg.reference.dt)));
  const double h = t_end / static_cast<double>(steps);
  std::vector<long> marks;
  for (double t : times) marks.push_back(std::llround(t / h));

  const auto& part = cfg.reference.partition;
  out.series.push_back(observables(f, out.grid, part));
  const double norm0 = out.series.front().norm;
  for (long i = 0; i <= steps; ++i) {
    if (i > 0) {
      solver.step(f, h);
      f.t = i * h;
      if (i % cfg.outputs.sample_every == 0 || i == steps) out.series.push_back(observables(f, out.grid, part));
    }
    for (long m : marks)
      if (m == i) out.snapshots.push_back(f);
  }
  for (const auto& o : out.series)
    out.worst_norm_drift = std::max(out.worst_norm_drift, std::abs(o.norm - norm0) / norm0);
  out.final_field = f;
  return out;
}

}  // namespace

AsymptoticSolution SemiclassicalRun::solution(const Eigen::VectorXd& x, double t, bool correction,
                                              const EvolutionOptions& opt) const {
  std::vector<Eigen::VectorXcd> psi0;
  std::vector<Eigen::VectorXcd> psi1;
  for (std::size_t s = 0; s < gaussians.size(); ++s) {
    const int si = static_cast<int>(s);
    psi0.push_back(leading_term_gaussian(gaussians[s], si, traj, phase[s], m[s], x, t));
    if (correction)
      psi1.push_back(first_correction_1d(gaussians[s], traj, *model, si, phase[s], m[s], x, t,
                                         quad_steps, opt));
  }
  return assemble_solution(x, psi0, psi1, traj.states.front().hbar);
}

SemiclassicalRun build_semiclassical(const ScenarioConfig& cfg, bool with_propagators) {
  SemiclassicalRun run;
  run.model = make_model(cfg.model.name, cfg.model.params);
  run.gaussians = cfg.gaussians();
  run.quad_steps = cfg.evolution.quad_steps;
  run.traj = integrate_he(cfg.initial_state(), *run.model, cfg.he_options(), cfg.he.t_end, cfg.he.dt);
  if (with_propagators) {
    for (int s = 0; s < static_cast<int>(cfg.particles.size()); ++s) {
      run.m.push_back(integrate_m_matrix(run.traj, *run.model, s, cfg.he.t_end, cfg.he.dt));
      run.phase.push_back(integrate_action(run.traj, *run.model, s, cfg.he.t_end, cfg.he.dt));
    }
  }
  return run;
}

ReferenceParams reference_params(const ScenarioConfig& cfg) {
  ReferenceParams rp;
  rp.epsilon = cfg.model.params.at("epsilon");
  rp.c = cfg.model.params.at("c");
  rp.kappa = cfg.model.kappa;
  rp.lambda = cfg.model.lambda;
  rp.hbar = cfg.model.hbar;
  return rp;
}

ComplexField initial_field(const ScenarioConfig& cfg, const Grid1D& grid) {
  ComplexField f;
  f.hbar = cfg.model.hbar;
  f.values = Eigen::VectorXcd::Zero(grid.npoints);
  for (const auto& p : cfg.particles)
    f.values += gaussian_field(grid, p.N, p.gamma, p.X0.at(0), p.P0.empty() ? 0.0 : p.P0[0],
                               cfg.model.hbar);
  return f;
}

json run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir, const Stages& stages,
                  const std::string& command) {
  fs::create_directories(out_dir);
  json manifest;
  manifest["program"] = "sqp";
  manifest["version"] = SQP_VERSION;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["command"] = command;
  manifest["config"] = config_json(cfg);
  manifest["stages"] = json::object();
  manifest["artifacts"] = json::array();

  std::vector<std::string> artifacts;
  auto finish = [&]() {
    for (const auto& name : artifacts) {
      const fs::path p = out_dir / name;
      manifest["artifacts"].push_back(
          {{"path", name}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  };

  const auto times = snapshot_times(cfg);
  const bool want_evolution = stages.evolution && cfg.evolution.enabled;
  const bool want_reference = (stages.reference || stages.compare) && cfg.reference.enabled;
  const bool want_compare = stages.compare && cfg.evolution.enabled && cfg.reference.enabled;
  const bool need_he = stages.he || want_evolution || want_compare;

  std::optional<SemiclassicalRun> sc;
  std::optional<ReferenceOutcome> ref;
  std::string current;

  try {
    if (need_he) {
      current = "he";
      Stopwatch sw;
      sc = build_semiclassical(cfg, want_evolution || want_compare);
      const auto& traj = sc->traj;
      const int K = static_cast<int>(cfg.particles.size());
      json diag;
      double min_sep = std::numeric_limits<double>::infinity();
      for (double s : traj.separation) min_sep = std::min(min_sep, s);
      diag["min_separation"] = std::isfinite(min_sep) ? json(min_sep) : json(nullptr);
      diag["steps"] = traj.t.size() - 1;
      const double hb = cfg.model.hbar;
      double mass_drift = 0.0;
      for (int s = 0; s < K; ++s) {
        const double m0 = traj.states.front().particles[s].moments.total_mass(hb);
        for (const auto& st : traj.states)
          mass_drift = std::max(mass_drift, std::abs(st.particles[s].moments.total_mass(hb) - m0) / m0);
      }
      diag["max_relative_mass_change"] = mass_drift;
      if (cfg.emits("he_series")) {
        write_he_csv(out_dir / "he_series.csv", traj, cfg.outputs.sample_every);
        artifacts.push_back("he_series.csv");
      }
      if (cfg.emits("observables")) {
        std::vector<std::string> header{"t"};
        for (int s = 1; s <= K; ++s) {
          header.push_back("mu_" + std::to_string(s));
          header.push_back("sigma2_" + std::to_string(s));
        }
        CsvWriter w(out_dir / "observables.csv", header);
        const auto step = static_cast<std::size_t>(cfg.outputs.sample_every);
        for (std::size_t k = 0; k < traj.t.size(); ++k) {
          if (k % step != 0 && k + 1 != traj.t.size()) continue;
          std::vector<double> row{traj.t[k]};
          for (int s = 0; s < K; ++s) {
            row.push_back(traj.states[k].particles[s].moments.total_mass(hb));
            row.push_back(dispersion(traj, s, traj.t[k]));
          }
          w.row(row);
        }
        artifacts.push_back("observables.csv");
      }
      manifest["stages"]["he"] = {{"status", "ok"}, {"wall_time_s", sw.seconds()}, {"diagnostics", diag}};
    }

    if (want_evolution) {
      current = "evolution";
      Stopwatch sw;
      json diag;
      double defect = 0.0;
      for (const auto& m : sc->m) defect = std::max(defect, m.max_defect());
      diag["max_symplectic_defect"] = defect;
      const Eigen::VectorXd x = linspace(cfg.evolution.x_min, cfg.evolution.x_max, cfg.evolution.x_points);
      const double sqh = std::sqrt(cfg.model.hbar);
      std::optional<CsvWriter> summary;
      if (cfg.emits("observables")) {
        summary.emplace(out_dir / "evolution_summary.csv",
                        std::vector<std::string>{"t", "norm0", "correction_ratio"});
        artifacts.push_back("evolution_summary.csv");
      }
      double worst_ratio = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto sol = sc->solution(x, times[i], cfg.evolution.correction);
        const double ratio = sol.psi1 ? sqh * sol.psi1->norm() / sol.psi0.norm() : 0.0;
        worst_ratio = std::max(worst_ratio, ratio);
        if (summary) summary->row({times[i], sol.psi0.norm(), ratio});
        if (cfg.emits("density")) {
          const std::string name = "density_" + std::to_string(i) + ".csv";
          write_field_csv(out_dir / name, x, sol.total());
          artifacts.push_back(name);
        }
      }
      if (cfg.evolution.correction) diag["max_correction_ratio"] = worst_ratio;
      manifest["stages"]["evolution"] = {
          {"status", "ok"}, {"wall_time_s", sw.seconds()}, {"diagnostics", diag}};
    } else if (stages.evolution) {
      manifest["stages"]["evolution"] = {{"status", "skipped"}};
    }

    if (want_reference) {
      current = "reference";
      Stopwatch sw;
      ref = run_reference(cfg, times);
      const Eigen::VectorXd x = ref->grid.points();
      if (cfg.emits("observables")) {
        std::vector<std::string> header{"t", "norm", "center", "variance"};
        const std::size_t regions = cfg.reference.partition.size() + 1;
        for (std::size_t r = 1; r <= regions; ++r) header.push_back("mass_" + std::to_string(r));
        for (std::size_t r = 1; r <= regions; ++r) header.push_back("center_" + std::to_string(r));
        CsvWriter w(out_dir / "reference_observables.csv", header);
        for (const auto& o : ref->series) {
          std::vector<double> row{o.t, o.norm, o.center, o.variance};
          row.insert(row.end(), o.region_mass.begin(), o.region_mass.end());
          row.insert(row.end(), o.region_center.begin(), o.region_center.end());
          w.row(row);
        }
        artifacts.push_back("reference_observables.csv");
      }
      if (cfg.emits("density")) {
        for (std::size_t i = 0; i < ref->snapshots.size(); ++i) {
          const std::string name = "reference_density_" + std::to_string(i) + ".csv";
          write_field_csv(out_dir / name, x, ref->snapshots[i].values);
          artifacts.push_back(name);
        }
        write_field_binary(out_dir / "reference_final.bin", ref->final_field.values,
                           {{"t", ref->final_field.t},
                            {"hbar", cfg.model.hbar},
                            {"L", cfg.reference.L},
                            {"npoints", cfg.reference.npoints}});
        artifacts.push_back("reference_final.bin");
        artifacts.push_back("reference_final.bin.json");
      }
      manifest["stages"]["reference"] = {
          {"status", "ok"},
          {"wall_time_s", sw.seconds()},
          {"diagnostics", {{"max_relative_norm_change", ref->worst_norm_drift}}}};
    } else if (stages.reference) {
      manifest["stages"]["reference"] = {{"status", "skipped"}};
    }

    if (want_compare) {
      current = "compare";
      Stopwatch sw;
      const Eigen::VectorXd x = ref->grid.points();
      const bool corr = cfg.evolution.correction;
      const double hb = cfg.model.hbar;
      std::optional<CsvWriter> w;
      const auto& part = cfg.reference.partition;
      const bool per_region = part.size() + 1 == cfg.particles.size();
      if (cfg.emits("comparison")) {
        std::vector<std::string> header{"t", "l2_rel0", "l2_rel1", "density_l2", "trajectory"};
        if (per_region)
          for (std::size_t s = 1; s <= cfg.particles.size(); ++s)
            header.push_back("mass_rel_err_" + std::to_string(s));
        w.emplace(out_dir / "comparison.csv", header);
        artifacts.push_back("comparison.csv");
      }
      double worst = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& rf = ref->snapshots.at(i);
        const auto sol = sc->solution(x, times[i], corr);
        const ComplexField a{sol.psi0, times[i], hb};
        const ComplexField b{sol.total(), times[i], hb};
        const double e0 = compare_fields(a, rf, CompareMode::l2_rel, ref->grid);
        const double e1 = corr ? compare_fields(b, rf, CompareMode::l2_rel, ref->grid) : e0;
        std::vector<double> row{times[i], e0, e1, compare_fields(b, rf, CompareMode::density_l2, ref->grid),
                                compare_fields(b, rf, CompareMode::trajectory, ref->grid, part)};
        if (per_region) {
          const auto o = observables(rf, ref->grid, part);
          const auto st = sc->traj.state_at(times[i]);
          // regions are ordered by position, particles by their current X
          std::vector<std::pair<double, double>> by_x;
          for (const auto& p : st.particles) by_x.emplace_back(p.Z.x[0], p.moments.total_mass(hb));
          std::sort(by_x.begin(), by_x.end());
          for (std::size_t s = 0; s < by_x.size(); ++s)
            row.push_back(std::abs(by_x[s].second - o.region_mass[s]) / o.region_mass[s]);
        }
        worst = std::max(worst, e1);
        if (w) w->row(row);
      }
      manifest["stages"]["compare"] = {
          {"status", "ok"}, {"wall_time_s", sw.seconds()}, {"diagnostics", {{"max_l2_rel", worst}}}};
    } else if (stages.compare) {
      manifest["stages"]["compare"] = {{"status", "skipped"}};
    }
  } catch (const std::exception& e) {
    manifest["stages"][current] = {{"status", "failed"}, {"error", e.what()}};
    finish();
    throw;
  }
  finish();
  return manifest;
}

ScanResult hbar_scan(const ScenarioConfig& cfg, const std::vector<double>& hbars) {
  if (hbars.empty()) throw ConfigError("hbars", "empty scan");
  if (!cfg.reference.enabled) throw ConfigError("reference.enabled", "the scan needs the reference solver");
  const Grid1D grid(cfg.reference.L, cfg.reference.npoints);
  double narrowest = std::numeric_limits<double>::infinity();
  const double hmin = *std::min_element(hbars.begin(), hbars.end());
  for (const auto& p : cfg.particles) narrowest = std::min(narrowest, p.gamma * std::sqrt(hmin));
  if (narrowest / grid.dx() < 16.0)
    throw ConfigError("reference.npoints", "grid resolves the narrowest packet with fewer than 16 points");

  ScanResult out;
  const double T = cfg.he.t_end;
  const Eigen::VectorXd x = grid.points();
  for (double hb : hbars) {
    ScenarioConfig c = cfg;
    c.model.hbar = hb;
    const auto sc = build_semiclassical(c, true);
    const auto run = evolve_reference(initial_field(c, grid), grid, reference_params(c), T,
                                      c.reference.dt, std::numeric_limits<int>::max());
    const auto sol = sc.solution(x, T, true);
    ScanRow row;
    row.hbar = hb;
    row.l2_rel0 = compare_fields({sol.psi0, T, hb}, run.final_field, CompareMode::l2_rel, grid);
    row.l2_rel1 = compare_fields({sol.total(), T, hb}, run.final_field, CompareMode::l2_rel, grid);
    row.correction_ratio = std::sqrt(hb) * sol.psi1->norm() / sol.psi0.norm();
    out.rows.push_back(row);
  }
  std::vector<ScanRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.hbar > b.hbar; });
  out.decreasing = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (!(sorted[i].l2_rel0 < sorted[i - 1].l2_rel0)) out.decreasing = false;
  out.correction_helps = std::all_of(out.rows.begin(), out.rows.end(),
                                     [](const ScanRow& r) { return r.l2_rel1 <= r.l2_rel0; });
  return out;
}

double period_estimate(const std::vector<double>& t, const std::vector<double>& values) {
  if (t.size() != values.size()) throw GridMismatch("time and value series differ in length");
  if (values.empty()) throw InsufficientOscillations("empty series");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v - mean));
  std::vector<double> crossings;
  if (scale > 1e-12 * std::max(1.0, std::abs(mean))) {
    for (std::size_t i = 1; i < values.size(); ++i) {
      const double a = values[i - 1] - mean;
      const double b = values[i] - mean;
      if (a < 0.0 && b >= 0.0) crossings.push_back(t[i - 1] + (t[i] - t[i - 1]) * (-a) / (b - a));
    }
  }
  if (crossings.size() < 3)
    throw InsufficientOscillations("fewer than two full oscillations in the series");
  return (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

double period_estimate(const fs::path& csv, const std::string& column) {
  const auto table = read_csv(csv);
  return period_estimate(table.column("t"), table.column(column));
}

}  // namespace sqp
