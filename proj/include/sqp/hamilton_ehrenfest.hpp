// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "sqp/symbols.hpp"
#include "sqp/tensor.hpp"

namespace sqp {

/// Number of √ħ orders carried by every moment series (k = 0..3).
inline constexpr int kSeriesLength = 4;
/// Highest moment rank kept by the hierarchy.
inline constexpr int kMaxMomentRank = 3;

/// ħ-expansion of the mass and central moments of one quasiparticle:
///   μ(t, ħ) = Σ_k ħ^{k/2} μ^(k)(t),  Δ_{i..}(t, ħ) = Σ_k ħ^{k/2} Δ_{i..}^(k)(t).
/// `moment[m][k]` is the rank-m tensor of order k; rank 0 is the mass.
/// Moments are expectations of (z - Z)^m, not divided by the mass.
struct MomentSet {
  int phase_dim = 0;
  std::array<std::array<Tensor<double>, kSeriesLength>, kMaxMomentRank + 1> moment;

  MomentSet() = default;
  explicit MomentSet(int phase_dim);

  double& mu(int k) { return moment[0][k][0]; }
  double mu(int k) const { return moment[0][k][0]; }
  Tensor<double>& delta(int rank, int k) { return moment[rank][k]; }
  const Tensor<double>& delta(int rank, int k) const { return moment[rank][k]; }

  /// Σ_k ħ^{k/2} μ^(k).
  double total_mass(double hbar) const;
};

struct QuasiparticleState {
  PhasePoint Z;
  MomentSet moments;
};

struct EnsembleState {
  std::vector<QuasiparticleState> particles;
  double t = 0.0;
  double hbar = 0.1;
  double kappa = 0.0;
  double lambda = 0.0;
  /// Moments were initialized per unit mass (see gaussian_initial_moments).
  bool normalized_moments = false;

  int size() const { return static_cast<int>(particles.size()); }
  int dim() const { return particles.empty() ? 0 : particles.front().Z.dim(); }
};

struct HeOptions {
  int order = 0;
  bool even_reduction = false;
  /// Minimum allowed |Z_r - Z_s|; negative selects 1e-3 times the model's
  /// interaction length.
  double collision_threshold = -1.0;
};

/// Smallest phase-space distance between two distinct particles, +inf for K = 1.
double min_separation(const EnsembleState& state);

/// Time derivative of every retained field. Fields above `order` and, with
/// even reduction, all odd orders are returned as zero.
EnsembleState he_rhs(const EnsembleState& state, const ModelSymbols& model, const HeOptions& opt);

/// Flattened state layout used by the integrator: per particle P, X, then
/// every moment[m][k] tensor.
Eigen::VectorXd flatten(const EnsembleState& state);
void unflatten(const Eigen::VectorXd& v, EnsembleState& state);

struct HeSeries {
  HeOptions options;
  std::vector<double> t;
  std::vector<EnsembleState> states;
  /// Flattened he_rhs at every sample (for Hermite interpolation).
  std::vector<Eigen::VectorXd> rates;
  std::vector<double> separation;

  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }
  /// Cubic Hermite interpolation between samples.
  EnsembleState state_at(double time) const;
};

/// Classical fourth-order Runge-Kutta with fixed step. The last step is
/// shortened to land on t_end.
HeSeries integrate_he(const EnsembleState& state0, const ModelSymbols& model, const HeOptions& opt,
                      double t_end, double dt);

struct GaussianParams {
  double N = 1.0;
  double gamma = 1.0;
  Eigen::VectorXd X0;
  Eigen::VectorXd P0;
};

/// Quasiparticle for ψ(x) = N ħ^{-n/4} exp(-|x - X0|²/(2γ²ħ) + i⟨P0, x - X0⟩/ħ).
/// All mass goes to μ^(0) = N²(γ√π)^n; the second moments go to order 2:
/// Δ_{xx}^(2) = μγ²/2, Δ_{pp}^(2) = μ/(2γ²), or per unit mass with `normalized`.
QuasiparticleState gaussian_initial_moments(const GaussianParams& g, double hbar,
                                            bool normalized = false);

/// γ = ε^{-1/4}.
double rest_width(double epsilon);

/// 2π(ε + κγN²√π c²(32π² - 2c²)/(c² + 4π²)^{7/2}).
double linearized_period(double epsilon, double kappa, double gamma, double N, double c);

}  // namespace sqp
