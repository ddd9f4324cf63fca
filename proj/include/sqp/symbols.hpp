// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sqp/tensor.hpp"

namespace sqp {

/// Point z = (p, x) of the 2n-dimensional phase space. Phase-space
/// coordinates are numbered with all momenta first: z_i = p_i for i < n and
/// z_{n+i} = x_i.
struct PhasePoint {
  Eigen::VectorXd p;
  Eigen::VectorXd x;

  PhasePoint() = default;
  PhasePoint(Eigen::VectorXd p_, Eigen::VectorXd x_);
  static PhasePoint from_z(const Eigen::VectorXd& z);
  static PhasePoint scalar(double p, double x);

  int dim() const { return static_cast<int>(x.size()); }
  Eigen::VectorXd z() const;
};

/// Per-coordinate derivative orders over the 2n phase coordinates.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex zero(int phase_dim);
  /// Builds the multi-index of the derivative ∂_{z_{i1}} ∂_{z_{i2}} ...
  static MultiIndex from_coordinates(int phase_dim, const std::vector<int>& coords);

  int order() const;
  int phase_dim() const { return static_cast<int>(entries_.size()); }
  int operator[](int i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }

  /// Orders restricted to momenta / positions (n each).
  int momentum_order() const;
  int position_order() const;

  MultiIndex raised(int coord) const;
  MultiIndex lowered(int coord) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> entries_;
};

enum class SymbolKind { hermitian, antihermitian };

inline constexpr int kMaxHermitianOrder = 4;
inline constexpr int kMaxAntihermitianOrder = 3;

inline int max_order(SymbolKind kind) {
  return kind == SymbolKind::hermitian ? kMaxHermitianOrder : kMaxAntihermitianOrder;
}

/// A model of the nonlocal equation: the one-body symbols V, V̆ and the
/// two-body kernels W, W̆ together with their partial derivatives.
///
/// Kernels are bare: the coupling constant κ is applied by the callers.
/// Implementations must be pure; every method may be called concurrently.
/// See docs/model_authoring.md for the derivative-table contract.
class ModelSymbols {
 public:
  virtual ~ModelSymbols() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;

  /// ∂^α V(z, t) (or V̆).
  virtual double potential(SymbolKind kind, const PhasePoint& z, double t,
                           const MultiIndex& alpha) const = 0;
  /// ∂_z^α ∂_w^β W(z, w, t) (or W̆), without κ.
  virtual double kernel(SymbolKind kind, const PhasePoint& z, const PhasePoint& w, double t,
                        const MultiIndex& alpha, const MultiIndex& beta) const = 0;

  virtual bool potential_time_independent(SymbolKind) const { return true; }
  virtual bool kernel_time_independent(SymbolKind) const { return true; }
  /// True when W and W̆ vanish identically.
  virtual bool kernel_vanishes() const { return false; }

  /// Natural length scale of the kernel (sets the default collision margin).
  virtual double interaction_length() const { return 1.0; }
};

double potential_partial(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z, double t,
                         const MultiIndex& alpha);

double kernel_partial(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                      const PhasePoint& w, double t, const MultiIndex& alpha,
                      const MultiIndex& beta);

/// Table of all order-m partials ∂_{i1}...∂_{im} V at z as a symmetric
/// rank-m tensor over the phase coordinates.
Tensor<double> potential_table(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                               double t, int order);

/// Table W_{i1..iq | j1..jp}(z, w) as a rank-(q+p) tensor: the first q
/// indices differentiate z, the last p differentiate w.
Tensor<double> kernel_table(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                            const PhasePoint& w, double t, int z_order, int w_order);

// -- built-in models ------------------------------------------------------

/// One-dimensional optical lattice with a regularized dipole-dipole kernel:
///   V(z) = p²/2 + ε cos x,   W(z, w) = c² / ((x - y)² + c²)^{3/2},
/// with V̆ = V and W̆ = W.
///
/// With `far_field` set, cross terms (x ≠ y) use the small-c forms
/// W ≈ c²/|x - y|³ and their derivatives; self terms keep the exact values.
class DipoleCosineModel final : public ModelSymbols {
 public:
  DipoleCosineModel(double epsilon, double c, bool far_field = false);

  std::string name() const override { return far_field_ ? "dipole_cosine_far" : "dipole_cosine"; }
  int dim() const override { return 1; }
  double potential(SymbolKind, const PhasePoint& z, double t, const MultiIndex& alpha) const override;
  double kernel(SymbolKind, const PhasePoint& z, const PhasePoint& w, double t,
                const MultiIndex& alpha, const MultiIndex& beta) const override;
  double interaction_length() const override { return c_; }

  double epsilon() const { return epsilon_; }
  double c() const { return c_; }

  /// m-th derivative of g(R) = c² (R² + c²)^{-3/2}, m = 0..4.
  double radial_derivative(double r, int m) const;

 private:
  double epsilon_;
  double c_;
  bool far_field_;
};

/// V = Σ (p_i² + ω² x_i²)/2, V̆ = 0, no kernel.
class HarmonicModel final : public ModelSymbols {
 public:
  explicit HarmonicModel(int n = 1, double omega = 1.0);
  std::string name() const override { return "harmonic"; }
  int dim() const override { return n_; }
  double potential(SymbolKind, const PhasePoint& z, double t, const MultiIndex& alpha) const override;
  double kernel(SymbolKind, const PhasePoint&, const PhasePoint&, double, const MultiIndex&,
                const MultiIndex&) const override {
    return 0.0;
  }
  bool kernel_vanishes() const override { return true; }
  double omega() const { return omega_; }

 private:
  int n_;
  double omega_;
};

/// V = |p|²/2, V̆ = 0, no kernel.
class FreeParticleModel final : public ModelSymbols {
 public:
  explicit FreeParticleModel(int n = 1) : n_(n) {}
  std::string name() const override { return "free"; }
  int dim() const override { return n_; }
  double potential(SymbolKind, const PhasePoint& z, double t, const MultiIndex& alpha) const override;
  double kernel(SymbolKind, const PhasePoint&, const PhasePoint&, double, const MultiIndex&,
                const MultiIndex&) const override {
    return 0.0;
  }
  bool kernel_vanishes() const override { return true; }

 private:
  int n_;
};

/// Creates a built-in model by name ("dipole_cosine", "dipole_cosine_far",
/// "harmonic", "free"). Unknown names or parameters throw std::invalid_argument.
std::unique_ptr<ModelSymbols> make_model(const std::string& name,
                                         const std::map<std::string, double>& params);

// -- finite-difference consistency oracle ----------------------------------

struct FdSample {
  PhasePoint z;
  PhasePoint w;
  double t = 0.0;
};

struct FdReport {
  struct Entry {
    std::string symbol;  // "V", "Vb", "W", "Wb"
    int order = 0;
    double max_rel_error = 0.0;
  };
  std::vector<Entry> entries;
  double tolerance = 0.0;
  bool passed = true;

  double worst() const;
};

/// Compares every analytic partial of order m = 1..max against a central
/// difference (step `h`) of the analytic partial of order m-1, which checks
/// the whole derivative chain back to the symbol value.
FdReport check_partials_fd(const ModelSymbols& model, const std::vector<FdSample>& samples,
                           double tolerance, double h = 1e-5);

}  // namespace sqp
