// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/reference_solver.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sqp/errors.hpp"

namespace sqp {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI(0.0, 1.0);

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

Eigen::VectorXcd fwd(const Eigen::VectorXcd& v) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.fwd(out, v);
  return out;
}

Eigen::VectorXcd inv(const Eigen::VectorXcd& v) {
  Eigen::FFT<double> fft;
  Eigen::VectorXcd out;
  fft.inv(out, v);
  return out;
}

double trapezoid(const Eigen::VectorXd& f, double dx) {
  if (f.size() == 0) return 0.0;
  return dx * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

}  // namespace

Grid1D::Grid1D(double L_, int npoints_) : L(L_), npoints(npoints_) {
  if (!(L > 0.0)) throw std::invalid_argument("grid half-width must be positive");
  if (npoints < 256 || !is_pow2(npoints))
    throw std::invalid_argument("grid npoints must be a power of two >= 256");
}

Eigen::VectorXd Grid1D::points() const {
  Eigen::VectorXd x(npoints);
  for (int j = 0; j < npoints; ++j) x[j] = this->x(j);
  return x;
}

Eigen::VectorXd Grid1D::wavenumbers() const {
  Eigen::VectorXd k(npoints);
  const double base = 2.0 * std::numbers::pi / (2.0 * L);
  for (int j = 0; j < npoints; ++j) k[j] = base * (j < npoints / 2 ? j : j - npoints);
  return k;
}

KernelGrid build_kernel_grid(const Grid1D& grid, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("kernel length c must be positive");
  const int n = grid.npoints;
  const double dx = grid.dx();
  KernelGrid k;
  k.dx = dx;
  k.samples.resize(2 * n);
  auto w = [c](double r) { return c * c / std::pow(r * r + c * c, 1.5); };
  for (int j = 0; j <= n; ++j) k.samples[j] = w(j * dx);
  for (int j = 1; j < n; ++j) k.samples[2 * n - j] = k.samples[j];
  k.multiplier = fwd(k.samples.cast<Complex>()) * dx;
  return k;
}

Eigen::VectorXd convolve(const KernelGrid& kernel, const Eigen::VectorXd& rho) {
  const auto n = rho.size();
  if (2 * n != kernel.samples.size()) throw GridMismatch("density and kernel grids differ");
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(2 * n);
  padded.head(n) = rho.cast<Complex>();
  const Eigen::VectorXcd conv = inv(fwd(padded).cwiseProduct(kernel.multiplier));
  return conv.head(n).real();
}

SplitStepSolver::SplitStepSolver(const Grid1D& grid, const ReferenceParams& params)
    : grid_(grid), params_(params), x_(grid.points()), k_(grid.wavenumbers()) {
  if (!(params.hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  if (params.kappa != 0.0) kernel_ = build_kernel_grid(grid, params.c);
}

Eigen::VectorXd SplitStepSolver::effective_potential(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXd u = params_.epsilon * x_.array().cos();
  if (params_.kappa != 0.0) u += params_.kappa * convolve(kernel_, psi.cwiseAbs2());
  return u;
}

void SplitStepSolver::kinetic(Eigen::VectorXcd& psi, double dt) const {
  const double hb = params_.hbar;
  const Complex rate = kI / hb + params_.lambda;
  Eigen::VectorXcd spec = fwd(psi);
  for (Eigen::Index j = 0; j < spec.size(); ++j)
    spec[j] *= std::exp(-rate * (0.5 * hb * hb * k_[j] * k_[j]) * dt);
  psi = inv(spec);
}

void SplitStepSolver::check(const ComplexField& field) const {
  if (!field.values.allFinite())
    throw NonFinite("reference field became non-finite at t=" + std::to_string(field.t));
  const Eigen::VectorXd rho = field.values.cwiseAbs2();
  const double peak = rho.maxCoeff();
  const int edge = 8;
  const double e = std::max(rho.head(edge).maxCoeff(), rho.tail(edge).maxCoeff());
  if (peak > 0.0 && e > params_.leak_threshold * peak)
    throw BoundaryLeak("density reached the box edge at t=" + std::to_string(field.t));
}

void SplitStepSolver::step(ComplexField& field, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("split_step: dt must be positive");
  const Complex rate = kI / params_.hbar + params_.lambda;
  auto& psi = field.values;
  kinetic(psi, 0.5 * dt);
  Eigen::VectorXd u = effective_potential(psi);
  if (params_.lambda != 0.0 && params_.kappa != 0.0) {
    // density at the middle of the potential substep
    const Eigen::ArrayXd decay = (-0.5 * params_.lambda * u.array() * dt).exp();
    const Eigen::VectorXcd half = psi.array() * decay.cast<Complex>();
    u = effective_potential(half);
  }
  for (Eigen::Index j = 0; j < psi.size(); ++j) psi[j] *= std::exp(-rate * u[j] * dt);
  kinetic(psi, 0.5 * dt);
  field.t += dt;
  check(field);
}

double SplitStepSolver::mass_rate(const Eigen::VectorXcd& psi) const {
  const double hb = params_.hbar;
  const double dx = grid_.dx();
  const Eigen::VectorXcd spec = fwd(psi);
  // Parseval: Σ|ψ_j|² dx = dx/N Σ|ψ̂_k|²
  double kin = 0.0;
  for (Eigen::Index j = 0; j < spec.size(); ++j)
    kin += 0.5 * hb * hb * k_[j] * k_[j] * std::norm(spec[j]);
  kin *= dx / static_cast<double>(spec.size());
  const double pot = dx * (effective_potential(psi).array() * psi.cwiseAbs2().array()).sum();
  return -2.0 * params_.lambda * (kin + pot);
}

ComplexField split_step(const ComplexField& field, const Grid1D& grid,
                        const ReferenceParams& params, double dt) {
  ComplexField out = field;
  SplitStepSolver(grid, params).step(out, dt);
  return out;
}

Observables observables(const ComplexField& field, const Grid1D& grid,
                        const std::vector<double>& partition) {
  if (field.values.size() != grid.npoints) throw GridMismatch("field and grid differ in length");
  const Eigen::VectorXd x = grid.points();
  const Eigen::VectorXd rho = field.values.cwiseAbs2();
  const double dx = grid.dx();
  Observables o;
  o.t = field.t;
  o.norm = trapezoid(rho, dx);
  o.center = o.norm > 0.0 ? trapezoid(x.cwiseProduct(rho), dx) / o.norm : 0.0;
  const Eigen::VectorXd dev = (x.array() - o.center).square().matrix();
  o.variance = o.norm > 0.0 ? trapezoid(dev.cwiseProduct(rho), dx) / o.norm : 0.0;

  const std::size_t regions = partition.size() + 1;
  o.region_mass.assign(regions, 0.0);
  o.region_center.assign(regions, 0.0);
  for (int j = 0; j < grid.npoints; ++j) {
    const auto r = static_cast<std::size_t>(
        std::upper_bound(partition.begin(), partition.end(), x[j]) - partition.begin());
    const double w = (j == 0 || j == grid.npoints - 1) ? 0.5 * dx : dx;
    o.region_mass[r] += w * rho[j];
    o.region_center[r] += w * rho[j] * x[j];
  }
  for (std::size_t r = 0; r < regions; ++r)
    if (o.region_mass[r] > 0.0) o.region_center[r] /= o.region_mass[r];
  return o;
}

ReferenceRun evolve_reference(const ComplexField& psi0, const Grid1D& grid,
                              const ReferenceParams& params, double t_end, double dt,
                              int sample_every, const std::vector<double>& partition) {
  if (sample_every < 1) throw std::invalid_argument("sample_every must be positive");
  const SplitStepSolver solver(grid, params);
  ReferenceRun run;
  ComplexField f = psi0;
  const auto steps = static_cast<long>(std::llround((t_end - psi0.t) / dt));
  const double h = (t_end - psi0.t) / std::max(steps, 1L);
  run.samples.push_back(f);
  run.series.push_back(observables(f, grid, partition));
  run.norm_history.push_back(run.series.back().norm);
  for (long i = 1; i <= steps; ++i) {
    solver.step(f, h);
    f.t = psi0.t + i * h;
    if (i % sample_every == 0 || i == steps) {
      run.samples.push_back(f);
      run.series.push_back(observables(f, grid, partition));
      run.norm_history.push_back(run.series.back().norm);
    }
  }
  run.final_field = f;
  return run;
}

double compare_fields(const ComplexField& a, const ComplexField& b, CompareMode mode,
                      const Grid1D& grid, const std::vector<double>& partition) {
  if (a.values.size() != b.values.size()) throw GridMismatch("fields have different lengths");
  switch (mode) {
    case CompareMode::l2_rel:
      return (a.values - b.values).norm() / b.values.norm();
    case CompareMode::density_l2: {
      const Eigen::VectorXd da = a.values.cwiseAbs2();
      const Eigen::VectorXd db = b.values.cwiseAbs2();
      return (da - db).norm() / db.norm();
    }
    case CompareMode::trajectory: {
      const auto oa = observables(a, grid, partition);
      const auto ob = observables(b, grid, partition);
      double worst = 0.0;
      for (std::size_t r = 0; r < oa.region_center.size(); ++r)
        worst = std::max(worst, std::abs(oa.region_center[r] - ob.region_center[r]));
      return worst;
    }
  }
  return 0.0;
}

Eigen::VectorXcd gaussian_field(const Grid1D& grid, double N, double gamma, double X0, double P0,
                                double hbar) {
  Eigen::VectorXcd psi(grid.npoints);
  const double amp = N * std::pow(hbar, -0.25);
  for (int j = 0; j < grid.npoints; ++j) {
    const double d = grid.x(j) - X0;
    psi[j] = amp * std::exp(-d * d / (2.0 * gamma * gamma * hbar) + kI * P0 * d / hbar);
  }
  return psi;
}

}  // namespace sqp
