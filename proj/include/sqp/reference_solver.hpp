// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace sqp {

/// Uniform periodic grid x_j = -L + j·dx on [-L, L), dx = 2L/npoints.
struct Grid1D {
  double L = 0.0;
  int npoints = 0;

  Grid1D() = default;
  Grid1D(double L_, int npoints_);

  double dx() const { return 2.0 * L / npoints; }
  double x(int j) const { return -L + j * dx(); }
  Eigen::VectorXd points() const;
  /// Angular wavenumbers in FFT order.
  Eigen::VectorXd wavenumbers() const;
};

struct ComplexField {
  Eigen::VectorXcd values;
  double t = 0.0;
  double hbar = 0.0;
};

/// iħ∂_tΨ = (1 - iħΛ)(-ħ²/2 ∂_x² + ε cos x + κ(W∗|Ψ|²))Ψ with the
/// regularized dipole kernel W(R) = c²/(R² + c²)^{3/2}.
struct ReferenceParams {
  double epsilon = 1.0;
  double c = 3.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double hbar = 0.1;
  /// Relative edge density that triggers BoundaryLeak.
  double leak_threshold = 1e-10;
};

/// Kernel sampled at offsets j·dx on a doubled periodic grid (length 2N,
/// mirrored), so that its circular convolution with a zero-padded density is
/// the linear convolution on the box.
struct KernelGrid {
  Eigen::VectorXd samples;
  Eigen::VectorXcd multiplier;
  double dx = 0.0;
};

KernelGrid build_kernel_grid(const Grid1D& grid, double c);

/// (W∗ρ)(x_i) = Σ_j W(x_i - x_j) ρ_j dx.
Eigen::VectorXd convolve(const KernelGrid& kernel, const Eigen::VectorXd& rho);

class SplitStepSolver {
 public:
  SplitStepSolver(const Grid1D& grid, const ReferenceParams& params);

  /// One Strang step: half kinetic, full potential, half kinetic.
  void step(ComplexField& field, double dt) const;

  /// U = ε cos x + κ W∗|Ψ|².
  Eigen::VectorXd effective_potential(const Eigen::VectorXcd& psi) const;
  /// dμ/dt = -2Λ⟨Ψ|H[Ψ]|Ψ⟩ evaluated spectrally.
  double mass_rate(const Eigen::VectorXcd& psi) const;

  const Grid1D& grid() const { return grid_; }
  const ReferenceParams& params() const { return params_; }

 private:
  void kinetic(Eigen::VectorXcd& psi, double dt) const;
  void check(const ComplexField& field) const;

  Grid1D grid_;
  ReferenceParams params_;
  KernelGrid kernel_;
  Eigen::VectorXd x_;
  Eigen::VectorXd k_;
};

ComplexField split_step(const ComplexField& field, const Grid1D& grid,
                        const ReferenceParams& params, double dt);

struct Observables {
  double t = 0.0;
  double norm = 0.0;
  double center = 0.0;
  double variance = 0.0;
  std::vector<double> region_mass;
  std::vector<double> region_center;
};

/// Trapezoid moments of |Ψ|², globally and over the regions split at `partition`
/// (ascending points).
Observables observables(const ComplexField& field, const Grid1D& grid,
                        const std::vector<double>& partition);

struct ReferenceRun {
  std::vector<ComplexField> samples;
  std::vector<Observables> series;
  ComplexField final_field;
  std::vector<double> norm_history;
};

ReferenceRun evolve_reference(const ComplexField& psi0, const Grid1D& grid,
                              const ReferenceParams& params, double t_end, double dt,
                              int sample_every, const std::vector<double>& partition = {});

enum class CompareMode { l2_rel, density_l2, trajectory };

/// l2_rel = ‖a - b‖/‖b‖; density_l2 = ‖|a|² - |b|²‖/‖|b|²‖; trajectory = largest
/// difference of region centroids.
double compare_fields(const ComplexField& a, const ComplexField& b, CompareMode mode,
                      const Grid1D& grid, const std::vector<double>& partition = {});

/// N ħ^{-1/4} exp(-(x - X0)²/(2γ²ħ) + iP0(x - X0)/ħ) sampled on the grid.
Eigen::VectorXcd gaussian_field(const Grid1D& grid, double N, double gamma, double X0, double P0,
                                double hbar);

}  // namespace sqp
