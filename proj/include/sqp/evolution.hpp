// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "sqp/hamilton_ehrenfest.hpp"
#include "sqp/symbols.hpp"

namespace sqp {

using Complex = std::complex<double>;

/// Coefficients of the associated linear equation around Z_s(t):
///   -iħ∂_t Φ + (H0 + H1·Δẑ + ½ Δẑ·H2 Δẑ) Φ = 0.
struct AlseCoefficients {
  Complex H0;
  Eigen::VectorXcd H1;
  Eigen::MatrixXd H2;
  /// V + κΣ(μ_r W + Δ_{r,j} W_{|j}), the potential part of Ṡ.
  double action_potential = 0.0;
  /// Ż_s = J ∂V_eff at zeroth order (used by the phase integrand).
  Eigen::VectorXd Zdot;
  Eigen::VectorXd P;
};

/// Full moment value Σ_k ħ^{k/2} m^(k) over the orders carried by `opt`.
Tensor<double> full_moment(const MomentSet& m, int rank, double hbar, const HeOptions& opt);

AlseCoefficients alse_coefficients(const HeSeries& traj, const ModelSymbols& model, int s, double t);

/// Blocks of M = [[M1, -M3], [-M2, M4]].
struct MBlocks {
  Eigen::MatrixXd M1, M2, M3, M4;
};
MBlocks m_blocks(const Eigen::MatrixXd& M);

struct MSeries {
  std::vector<double> t;
  std::vector<Eigen::MatrixXd> M;
  std::vector<Eigen::MatrixXd> Mdot;
  std::vector<double> symplectic_defect;

  double max_defect() const;
  /// Cubic Hermite interpolation.
  Eigen::MatrixXd at(double time) const;
  /// Two-time matrix M(τ)^{-1} M(t), the solution started at τ from identity.
  Eigen::MatrixXd between(double tau, double time) const;
};

/// Ṁ = -M H2 J, M(0) = I, fourth-order Runge-Kutta on a fixed grid.
MSeries integrate_m_matrix(const HeSeries& traj, const ModelSymbols& model, int s, double t_end,
                           double dt);

struct ActionSeries {
  std::vector<double> t;
  std::vector<double> S;
  std::vector<Complex> phi;
  std::vector<double> S_rate;
  std::vector<Complex> phi_rate;

  double S_at(double time) const;
  Complex phi_at(double time) const;
};

/// Accumulates S with Ṡ = ⟨P, Ẋ⟩ - (V + κΣ(μ_r W + Δ_{r,j} W_{|j})) and the
/// complex phase with integrand ⟨P, Ẋ⟩ - H0 (Simpson rule per step).
ActionSeries integrate_action(const HeSeries& traj, const ModelSymbols& model, int s, double t_end,
                              double dt);

struct EvolutionOptions {
  double caustic_threshold = 1e-10;
  /// Relative tail mass above which propagate_quadrature flags truncation.
  double truncation_threshold = 1e-12;
  double quad_tolerance = 1e-4;
};

/// Green function of the associated linear equation (generic n).
Complex green_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t, int s,
                     const ActionSeries& phase, const MSeries& m, const HeSeries& traj,
                     const EvolutionOptions& opt = {});

/// Gaussian width parameter ϖ(t) = (iM1 - γ²M2)/(M3 + iγ²M4) for n = 1.
Complex gaussian_width(const MBlocks& b, double gamma);

/// Closed-form Ψ_s^(0)(x, t) for Gaussian initial data (n = 1).
Eigen::VectorXcd leading_term_gaussian(const GaussianParams& g, int s, const HeSeries& traj,
                                       const ActionSeries& phase, const MSeries& m,
                                       const Eigen::VectorXd& x_grid, double t);

struct QuadratureResult {
  Eigen::VectorXcd values;
  double tail_fraction = 0.0;
  bool truncation_warning = false;
};

/// ∫ G_s(x, y, t) ψ0(y) dy by the trapezoid rule on a uniform 1D y grid.
QuadratureResult propagate_quadrature(const Eigen::VectorXcd& psi0, const Eigen::VectorXd& y_grid,
                                      const Eigen::VectorXd& x_grid, double t, int s,
                                      const ActionSeries& phase, const MSeries& m,
                                      const HeSeries& traj, const EvolutionOptions& opt = {});

/// Polynomial coefficients c_0..c_3 of q(u) with L^(3)Ψ^(0) = q(Δy) Ψ^(0), for
/// a Gaussian of width parameter `varpi` at time t (n = 1).
std::array<Complex, 4> correction_polynomial(const HeSeries& traj, const ModelSymbols& model,
                                             int s, double t, Complex varpi);

/// Ψ_s^(1)(x, t) by the Duhamel integral with composite midpoint rule
/// (quad_steps panels, checked against 2·quad_steps).
Eigen::VectorXcd first_correction_1d(const GaussianParams& g, const HeSeries& traj,
                                     const ModelSymbols& model, int s, const ActionSeries& phase,
                                     const MSeries& m, const Eigen::VectorXd& x_grid, double t,
                                     int quad_steps, const EvolutionOptions& opt = {});

struct AsymptoticSolution {
  Eigen::VectorXd grid;
  Eigen::VectorXcd psi0;
  std::optional<Eigen::VectorXcd> psi1;
  double hbar = 0.0;

  /// Ψ^(0) + √ħ Ψ^(1).
  Eigen::VectorXcd total() const;
  Eigen::VectorXd density() const;
};

AsymptoticSolution assemble_solution(const Eigen::VectorXd& grid,
                                     const std::vector<Eigen::VectorXcd>& psi0,
                                     const std::vector<Eigen::VectorXcd>& psi1, double hbar);

/// σ² = ħ Δ_xx^(2) / (μ^(0) + ħ μ^(2)), averaged over the n position axes.
/// With per-unit-mass moments the numerator is scaled by μ^(0).
double dispersion(const HeSeries& traj, int s, double t);

/// Trapezoid ∫|f|² dx on a uniform grid.
double grid_norm2(const Eigen::VectorXcd& f, double dx);

}  // namespace sqp
