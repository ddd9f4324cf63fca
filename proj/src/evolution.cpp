// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sqp/errors.hpp"

namespace sqp {

namespace {

constexpr Complex kI(0.0, 1.0);

template <typename T>
T hermite(const std::vector<double>& ts, const std::vector<T>& ys, const std::vector<T>& dys,
          double time) {
  if (ts.empty()) throw InterpolationOutOfRange("empty series");
  const double slack = 1e-12 * std::max(1.0, std::abs(ts.back() - ts.front()));
  if (time < ts.front() - slack || time > ts.back() + slack)
    throw InterpolationOutOfRange("time " + std::to_string(time) + " outside series span");
  if (ts.size() == 1) return ys.front();
  time = std::clamp(time, ts.front(), ts.back());
  auto it = std::upper_bound(ts.begin(), ts.end(), time);
  std::size_t i = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
  if (i + 1 >= ts.size()) i = ts.size() - 2;
  const double h = ts[i + 1] - ts[i];
  const double u = (time - ts[i]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return T(h00 * ys[i] + (h10 * h) * dys[i] + h01 * ys[i + 1] + (h11 * h) * dys[i + 1]);
}

bool kernel_active(const EnsembleState& st, const ModelSymbols& model) {
  return st.kappa != 0.0 && !model.kernel_vanishes();
}

void check_collision(const EnsembleState& st, const ModelSymbols& model, const HeOptions& opt) {
  if (!kernel_active(st, model) || st.size() < 2) return;
  const double threshold =
      opt.collision_threshold >= 0.0 ? opt.collision_threshold : 1e-3 * model.interaction_length();
  if (min_separation(st) < threshold) throw CollisionError("quasiparticles collided");
}

Eigen::MatrixXd as_matrix(const Tensor<double>& t) {
  const int d = t.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = t(i, j);
  return m;
}

// Everything the Green function needs at one time.
struct KernelFrame {
  Complex prefactor;
  Complex phi;
  Eigen::VectorXd X, P, X0, P0;
  Eigen::MatrixXd M3inv_M1, M3inv, M4_M3inv;
  double hbar;

  KernelFrame(double t, int s, const ActionSeries& phase, const MSeries& m, const HeSeries& traj,
              const EvolutionOptions& opt) {
    const auto b = m_blocks(m.at(t));
    const double det = b.M3.determinant();
    if (std::abs(det) < opt.caustic_threshold)
      throw CausticSingular("det M3 vanishes at t=" + std::to_string(t));
    const auto st = traj.state_at(t);
    const auto& st0 = traj.states.front();
    hbar = st.hbar;
    const auto n = b.M3.rows();
    const Complex c = -2.0 * std::numbers::pi * kI * hbar;
    prefactor = 1.0 / std::sqrt(std::pow(c, static_cast<int>(n)) * det);
    phi = phase.phi_at(t);
    X = st.particles[s].Z.x;
    P = st.particles[s].Z.p;
    X0 = st0.particles[s].Z.x;
    P0 = st0.particles[s].Z.p;
    M3inv = b.M3.inverse();
    M3inv_M1 = M3inv * b.M1;
    M4_M3inv = b.M4 * M3inv;
  }

  Complex operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Eigen::VectorXd dx = x - X;
    const Eigen::VectorXd dy = y - X0;
    const double q = P.dot(dx) - P0.dot(dy) - 0.5 * dx.dot(M3inv_M1 * dx) + dx.dot(M3inv * dy) -
                     0.5 * dy.dot(M4_M3inv * dy);
    return prefactor * std::exp(kI / hbar * (phi + q));
  }
};

// √(γ²M4 - iM3) continued along the sampled M series from t = 0.
Complex tracked_root(const MSeries& m, double gamma, double t) {
  auto arg = [&](const Eigen::MatrixXd& M) {
    const auto b = m_blocks(M);
    return gamma * gamma * b.M4(0, 0) - kI * b.M3(0, 0);
  };
  Complex prev = std::sqrt(arg(m.M.front()));
  for (std::size_t i = 1; i < m.t.size() && m.t[i] < t; ++i) {
    Complex r = std::sqrt(arg(m.M[i]));
    if (std::abs(r - prev) > std::abs(r + prev)) r = -r;
    prev = r;
  }
  Complex r = std::sqrt(arg(m.at(t)));
  if (std::abs(r - prev) > std::abs(r + prev)) r = -r;
  return r;
}

}  // namespace

Tensor<double> full_moment(const MomentSet& m, int rank, double hbar, const HeOptions& opt) {
  Tensor<double> out(m.phase_dim, rank);
  for (int k = rank; k < kSeriesLength && k <= opt.order; ++k) {
    if (opt.even_reduction && k % 2) continue;
    out += std::pow(hbar, 0.5 * k) * m.moment[rank][k];
  }
  return out;
}

AlseCoefficients alse_coefficients(const HeSeries& traj, const ModelSymbols& model, int s,
                                   double t) {
  const auto st = traj.state_at(t);
  check_collision(st, model, traj.options);
  const int n = st.dim();
  const auto& zs = st.particles[s].Z;
  const auto herm = SymbolKind::hermitian;
  const auto anti = SymbolKind::antihermitian;

  double h0 = potential_table(model, herm, zs, t, 0)[0];
  double act = h0;
  Eigen::VectorXd h1 = potential_table(model, herm, zs, t, 1).data();
  Eigen::VectorXd z1 = h1;
  Eigen::MatrixXd h2 = as_matrix(potential_table(model, herm, zs, t, 2));
  double damp = st.lambda != 0.0 ? potential_table(model, anti, zs, t, 0)[0] : 0.0;

  if (kernel_active(st, model)) {
    const double kap = st.kappa;
    for (const auto& pr : st.particles) {
      const auto& mom = pr.moments;
      const double mu = full_moment(mom, 0, st.hbar, traj.options)[0];
      const auto d1 = full_moment(mom, 1, st.hbar, traj.options);
      const auto d2 = full_moment(mom, 2, st.hbar, traj.options);
      const double w00 = kernel_table(model, herm, zs, pr.Z, t, 0, 0)[0];
      const auto w01 = kernel_table(model, herm, zs, pr.Z, t, 0, 1);
      const auto w02 = kernel_table(model, herm, zs, pr.Z, t, 0, 2);
      const auto w10 = kernel_table(model, herm, zs, pr.Z, t, 1, 0);
      const auto w11 = kernel_table(model, herm, zs, pr.Z, t, 1, 1);
      const auto w20 = kernel_table(model, herm, zs, pr.Z, t, 2, 0);
      const double lin = w01.data().dot(d1.data());
      h0 += kap * (mu * w00 + lin + 0.5 * w02.data().dot(d2.data()));
      act += kap * (mu * w00 + lin);
      h1 += kap * (mu * w10.data() + contract_trailing(w11, d1).data());
      h2 += kap * mu * as_matrix(w20);
      z1 += kap * mom.mu(0) * w10.data();
      if (st.lambda != 0.0) damp += kap * mom.mu(0) * kernel_table(model, anti, zs, pr.Z, t, 0, 0)[0];
    }
  }

  AlseCoefficients c;
  c.H0 = Complex(h0, -st.hbar * st.lambda * damp);
  c.H1 = h1.cast<Complex>();
  c.H2 = 0.5 * (h2 + h2.transpose());
  c.action_potential = act;
  c.Zdot = symplectic_j(n) * z1;
  c.P = zs.p;
  return c;
}

MBlocks m_blocks(const Eigen::MatrixXd& M) {
  const auto n = M.rows() / 2;
  return {M.topLeftCorner(n, n), -M.bottomLeftCorner(n, n), -M.topRightCorner(n, n),
          M.bottomRightCorner(n, n)};
}

double MSeries::max_defect() const {
  return symplectic_defect.empty()
             ? 0.0
             : *std::max_element(symplectic_defect.begin(), symplectic_defect.end());
}

Eigen::MatrixXd MSeries::at(double time) const { return hermite(t, M, Mdot, time); }

Eigen::MatrixXd MSeries::between(double tau, double time) const {
  return at(tau).partialPivLu().solve(at(time));
}

MSeries integrate_m_matrix(const HeSeries& traj, const ModelSymbols& model, int s, double t_end,
                           double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_m_matrix: dt must be positive");
  const int n = traj.states.front().dim();
  const Eigen::MatrixXd J = symplectic_j(n);
  auto f = [&](double time, const Eigen::MatrixXd& M) -> Eigen::MatrixXd {
    return -M * alse_coefficients(traj, model, s, time).H2 * J;
  };
  auto defect = [&](const Eigen::MatrixXd& M) { return (M * J * M.transpose() - J).cwiseAbs().maxCoeff(); };

  MSeries out;
  const double t0 = traj.t_begin();
  const auto steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  double time = t0;
  Eigen::MatrixXd k1 = f(time, M);
  out.t.push_back(time);
  out.M.push_back(M);
  out.Mdot.push_back(k1);
  out.symplectic_defect.push_back(defect(M));
  for (long i = 1; i <= steps; ++i) {
    const double t_next = i == steps ? t_end : t0 + i * dt;
    const double h = t_next - time;
    const Eigen::MatrixXd k2 = f(time + 0.5 * h, M + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = f(time + 0.5 * h, M + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = f(time + h, M + h * k3);
    M += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    time = t_next;
    if (!M.allFinite()) throw NonFinite("M-matrix became non-finite");
    k1 = f(time, M);
    out.t.push_back(time);
    out.M.push_back(M);
    out.Mdot.push_back(k1);
    out.symplectic_defect.push_back(defect(M));
  }
  return out;
}

double ActionSeries::S_at(double time) const { return hermite(t, S, S_rate, time); }

Complex ActionSeries::phi_at(double time) const { return hermite(t, phi, phi_rate, time); }

ActionSeries integrate_action(const HeSeries& traj, const ModelSymbols& model, int s, double t_end,
                              double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_action: dt must be positive");
  auto f = [&](double time) {
    const auto c = alse_coefficients(traj, model, s, time);
    const auto n = c.P.size();
    const double pxdot = c.P.dot(c.Zdot.tail(n));
    return std::pair<double, Complex>(pxdot - c.action_potential, pxdot - c.H0);
  };

  ActionSeries out;
  const double t0 = traj.t_begin();
  const auto steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
  double time = t0;
  double S = 0.0;
  Complex phi = 0.0;
  auto f0 = f(time);
  out.t.push_back(time);
  out.S.push_back(S);
  out.phi.push_back(phi);
  out.S_rate.push_back(f0.first);
  out.phi_rate.push_back(f0.second);
  for (long i = 1; i <= steps; ++i) {
    const double t_next = i == steps ? t_end : t0 + i * dt;
    const double h = t_next - time;
    const auto fm = f(time + 0.5 * h);
    const auto f1 = f(t_next);
    S += h / 6.0 * (f0.first + 4.0 * fm.first + f1.first);
    phi += h / 6.0 * (f0.second + 4.0 * fm.second + f1.second);
    time = t_next;
    f0 = f1;
    out.t.push_back(time);
    out.S.push_back(S);
    out.phi.push_back(phi);
    out.S_rate.push_back(f0.first);
    out.phi_rate.push_back(f0.second);
  }
  return out;
}

Complex green_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t, int s,
                     const ActionSeries& phase, const MSeries& m, const HeSeries& traj,
                     const EvolutionOptions& opt) {
  return KernelFrame(t, s, phase, m, traj, opt)(x, y);
}

Complex gaussian_width(const MBlocks& b, double gamma) {
  const double g2 = gamma * gamma;
  return (kI * b.M1(0, 0) - g2 * b.M2(0, 0)) / (b.M3(0, 0) + kI * g2 * b.M4(0, 0));
}

Eigen::VectorXcd leading_term_gaussian(const GaussianParams& g, int s, const HeSeries& traj,
                                       const ActionSeries& phase, const MSeries& m,
                                       const Eigen::VectorXd& x_grid, double t) {
  if (traj.states.front().dim() != 1) throw DimensionMismatch("leading_term_gaussian is 1D only");
  const auto st = traj.state_at(t);
  const double hbar = st.hbar;
  const double X = st.particles[s].Z.x[0];
  const double P = st.particles[s].Z.p[0];
  const Complex w = gaussian_width(m_blocks(m.at(t)), g.gamma);
  const Complex pref = g.N * g.gamma * std::pow(hbar, -0.25) / tracked_root(m, g.gamma, t);
  const Complex phi = phase.phi_at(t);
  Eigen::VectorXcd out(x_grid.size());
  for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
    const double dx = x_grid[i] - X;
    out[i] = pref * std::exp(-w * dx * dx / (2.0 * hbar) + kI / hbar * (phi + P * dx));
  }
  return out;
}

QuadratureResult propagate_quadrature(const Eigen::VectorXcd& psi0, const Eigen::VectorXd& y_grid,
                                      const Eigen::VectorXd& x_grid, double t, int s,
                                      const ActionSeries& phase, const MSeries& m,
                                      const HeSeries& traj, const EvolutionOptions& opt) {
  if (psi0.size() != y_grid.size() || y_grid.size() < 2)
    throw GridMismatch("psi0 and y grid differ in length");
  const KernelFrame frame(t, s, phase, m, traj, opt);
  const double dy = y_grid[1] - y_grid[0];
  const auto ny = y_grid.size();

  QuadratureResult res;
  const double peak = psi0.cwiseAbs2().maxCoeff();
  if (peak > 0.0)
    res.tail_fraction = std::max(std::norm(psi0[0]), std::norm(psi0[ny - 1])) / peak;
  res.truncation_warning = res.tail_fraction > opt.truncation_threshold;

  res.values = Eigen::VectorXcd::Zero(x_grid.size());
  Eigen::VectorXd xv(1), yv(1);
  for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
    xv[0] = x_grid[i];
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < ny; ++j) {
      if (psi0[j] == Complex(0.0)) continue;
      yv[0] = y_grid[j];
      const double wgt = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
      acc += wgt * frame(xv, yv) * psi0[j];
    }
    res.values[i] = acc * dy;
  }
  return res;
}

std::array<Complex, 4> correction_polynomial(const HeSeries& traj, const ModelSymbols& model,
                                             int s, double t, Complex varpi) {
  const auto st = traj.state_at(t);
  if (st.dim() != 1) throw DimensionMismatch("first correction is 1D only");
  check_collision(st, model, traj.options);
  const int d = 2;
  const double hbar = st.hbar;
  const double lam = st.lambda;
  const auto& zs = st.particles[s].Z;
  const auto herm = SymbolKind::hermitian;
  const auto anti = SymbolKind::antihermitian;

  // operator coefficients per monomial degree
  Tensor<Complex> c0(d, 0), c1(d, 1), c2(d, 2), c3(d, 3);
  c3.data() = (potential_table(model, herm, zs, t, 3).data() / 6.0).cast<Complex>();
  if (lam != 0.0)
    c1.data() -= kI * hbar * lam * potential_table(model, anti, zs, t, 1).data().cast<Complex>();

  if (kernel_active(st, model)) {
    const double kap = st.kappa;
    for (const auto& pr : st.particles) {
      const double mu = full_moment(pr.moments, 0, hbar, traj.options)[0];
      const auto d1 = full_moment(pr.moments, 1, hbar, traj.options);
      const auto d2 = full_moment(pr.moments, 2, hbar, traj.options);
      const auto d3 = full_moment(pr.moments, 3, hbar, traj.options);
      c0[0] += kap / 6.0 * kernel_table(model, herm, zs, pr.Z, t, 0, 3).data().dot(d3.data());
      c1.data() += (kap / 2.0 * contract_trailing(kernel_table(model, herm, zs, pr.Z, t, 1, 2), d2).data())
                       .cast<Complex>();
      c2.data() += (kap / 2.0 * contract_trailing(kernel_table(model, herm, zs, pr.Z, t, 2, 1), d1).data())
                       .cast<Complex>();
      c3.data() += (kap / 6.0 * mu * kernel_table(model, herm, zs, pr.Z, t, 3, 0).data()).cast<Complex>();
      if (lam != 0.0) {
        c0[0] -= kI * hbar * lam * kap *
                 kernel_table(model, anti, zs, pr.Z, t, 0, 1).data().dot(d1.data());
        c1.data() -= kI * hbar * lam * kap * mu *
                     kernel_table(model, anti, zs, pr.Z, t, 1, 0).data().cast<Complex>();
      }
    }
  }

  // Σ over ordered index tuples of a symmetric coefficient is the Weyl form.
  // On q(u)Ψ^(0): Δx̂ → u q, Δp̂ → -iħ q' + iϖ u q.
  using Poly = std::array<Complex, 4>;
  auto apply = [&](int coord, const Poly& f) {
    Poly g{};
    for (int k = 0; k < 4; ++k) {
      if (coord == 1) {
        if (k > 0) g[k] += f[k - 1];
      } else {
        if (k + 1 < 4) g[k] += -kI * hbar * double(k + 1) * f[k + 1];
        if (k > 0) g[k] += kI * varpi * f[k - 1];
      }
    }
    return g;
  };
  Poly q{};
  const Tensor<Complex>* coeffs[] = {&c0, &c1, &c2, &c3};
  for (int m = 0; m <= 3; ++m) {
    const auto& c = *coeffs[m];
    for (Eigen::Index f = 0; f < c.size(); ++f) {
      if (c[f] == Complex(0.0)) continue;
      const auto idx = c.unravel(f);
      Poly p{1.0, 0.0, 0.0, 0.0};
      for (int i = m - 1; i >= 0; --i) p = apply(idx[i], p);
      for (int k = 0; k < 4; ++k) q[k] += c[f] * p[k];
    }
  }
  return q;
}

Eigen::VectorXcd first_correction_1d(const GaussianParams& g, const HeSeries& traj,
                                     const ModelSymbols& model, int s, const ActionSeries& phase,
                                     const MSeries& m, const Eigen::VectorXd& x_grid, double t,
                                     int quad_steps, const EvolutionOptions& opt) {
  if (quad_steps < 1) throw std::invalid_argument("quad_steps must be positive");
  if (t <= traj.t_begin()) return Eigen::VectorXcd::Zero(x_grid.size());
  const double hbar = traj.states.front().hbar;
  const double X = traj.state_at(t).particles[s].Z.x[0];
  const double t0 = traj.t_begin();

  // The Gaussian propagated from τ to t is Ψ^(0)(t) itself, so only the
  // moments of the polynomial under that Gaussian depend on τ.
  auto integral = [&](int panels) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(x_grid.size());
    const double h = (t - t0) / panels;
    for (int j = 0; j < panels; ++j) {
      const double tau = t0 + (j + 0.5) * h;
      const Complex w = gaussian_width(m_blocks(m.at(tau)), g.gamma);
      const auto c = correction_polynomial(traj, model, s, tau, w);
      const auto mb = m_blocks(m.between(tau, t));
      const Complex den = mb.M3(0, 0) * w + kI * mb.M4(0, 0);
      if (std::abs(den) < opt.caustic_threshold)
        throw CausticSingular("focal point inside the Duhamel integral at tau=" + std::to_string(tau));
      const Complex var = hbar * mb.M3(0, 0) / den;
      for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
        const Complex mean = kI * (x_grid[i] - X) / den;
        const Complex e2 = mean * mean + var;
        const Complex e3 = mean * mean * mean + 3.0 * mean * var;
        acc[i] += h * (c[0] + c[1] * mean + c[2] * e2 + c[3] * e3);
      }
    }
    return acc;
  };
  const Eigen::VectorXcd psi0 = leading_term_gaussian(g, s, traj, phase, m, x_grid, t);
  const Eigen::VectorXcd coarse = psi0.cwiseProduct(integral(quad_steps));
  const Eigen::VectorXcd fine = psi0.cwiseProduct(integral(2 * quad_steps));
  const double diff = (fine - coarse).norm();
  if (diff > opt.quad_tolerance * fine.norm() && diff > 1e-14 * psi0.norm())
    throw QuadratureNotConverged("Duhamel quadrature not converged with " +
                                 std::to_string(2 * quad_steps) + " panels");
  return fine / (kI * std::pow(hbar, 1.5));
}

Eigen::VectorXcd AsymptoticSolution::total() const {
  if (!psi1) return psi0;
  return psi0 + std::sqrt(hbar) * *psi1;
}

Eigen::VectorXd AsymptoticSolution::density() const { return total().cwiseAbs2(); }

AsymptoticSolution assemble_solution(const Eigen::VectorXd& grid,
                                     const std::vector<Eigen::VectorXcd>& psi0,
                                     const std::vector<Eigen::VectorXcd>& psi1, double hbar) {
  AsymptoticSolution out;
  out.grid = grid;
  out.hbar = hbar;
  out.psi0 = Eigen::VectorXcd::Zero(grid.size());
  for (const auto& p : psi0) {
    if (p.size() != grid.size()) throw GridMismatch("leading term sampled on a different grid");
    out.psi0 += p;
  }
  if (!psi1.empty()) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(grid.size());
    for (const auto& p : psi1) {
      if (p.size() != grid.size()) throw GridMismatch("correction sampled on a different grid");
      acc += p;
    }
    out.psi1 = acc;
  }
  return out;
}

double dispersion(const HeSeries& traj, int s, double t) {
  const auto st = traj.state_at(t);
  const auto& mom = st.particles[s].moments;
  const int n = st.dim();
  const auto& d2 = mom.delta(2, 2);
  double xx = 0.0;
  for (int i = 0; i < n; ++i) xx += d2(n + i, n + i);
  xx /= n;
  double num = st.hbar * xx;
  if (st.normalized_moments) num *= mom.mu(0);
  return num / (mom.mu(0) + st.hbar * mom.mu(2));
}

double grid_norm2(const Eigen::VectorXcd& f, double dx) {
  if (f.size() == 0) return 0.0;
  const double ends = 0.5 * (std::norm(f[0]) + std::norm(f[f.size() - 1]));
  return dx * (f.cwiseAbs2().sum() - ends);
}

}  // namespace sqp
