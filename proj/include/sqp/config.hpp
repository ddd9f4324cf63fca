// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sqp/hamilton_ehrenfest.hpp"

namespace sqp {

struct ParticleConfig {
  double N = 1.0;
  double gamma = 1.0;
  std::vector<double> X0;
  std::vector<double> P0;
};

struct ScenarioConfig {
  struct Model {
    std::string name;
    std::map<std::string, double> params;
    double kappa = 0.0;
    double lambda = 0.0;
    double hbar = 0.0;
    bool normalized_moments = false;
  } model;

  std::vector<ParticleConfig> particles;

  struct He {
    int order = 0;
    bool even_reduction = false;
    double dt = 1e-3;
    double t_end = 0.0;
    double collision_threshold = -1.0;
  } he;

  struct Evolution {
    bool enabled = false;
    double x_min = 0.0;
    double x_max = 0.0;
    int x_points = 0;
    bool correction = false;
    int quad_steps = 200;
    std::vector<double> times;
  } evolution;

  struct Reference {
    bool enabled = false;
    double L = 0.0;
    int npoints = 0;
    double dt = 1e-3;
    std::vector<double> partition;
  } reference;

  struct Outputs {
    std::string directory = "out";
    int sample_every = 100;
    std::set<std::string> emit{"he_series", "density", "observables", "comparison"};
  } outputs;

  HeOptions he_options() const;
  /// Initial ensemble built from the Gaussian particles.
  EnsembleState initial_state() const;
  std::vector<GaussianParams> gaussians() const;
  bool emits(const std::string& artifact) const { return outputs.emit.count(artifact) > 0; }
};

/// Parses `section.key=value` overrides applied after the file is read.
/// `particle.key` targets every particle, `particleK.key` the K-th (1-based).
ScenarioConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

/// Real literal with optional `pi` factors: "3.5", "-pi", "2*pi", "pi/2".
double parse_real(const std::string& text);

}  // namespace sqp
