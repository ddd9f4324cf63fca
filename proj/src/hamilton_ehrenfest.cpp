// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/hamilton_ehrenfest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sqp/errors.hpp"

namespace sqp {

namespace {

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

// [rank][k] tables of the expanded symbol H_A^(k) around one trajectory point
using SymbolSeries = std::array<std::array<Tensor<double>, kSeriesLength>, kMaxHermitianOrder + 1>;

bool skip_order(int k, int order, bool even) { return k > order || (even && k % 2 != 0); }

SymbolSeries expand_symbol(const EnsembleState& st, const ModelSymbols& model, SymbolKind kind,
                           int s, int max_rank, const HeOptions& opt) {
  const int d = 2 * st.dim();
  SymbolSeries h;
  for (int a = 0; a <= kMaxHermitianOrder; ++a)
    for (int k = 0; k < kSeriesLength; ++k) h[a][k] = Tensor<double>(d, a);

  const auto& zs = st.particles[s].Z;
  for (int a = 0; a <= max_rank; ++a) h[a][0] += potential_table(model, kind, zs, st.t, a);

  if (st.kappa == 0.0 || model.kernel_vanishes()) return h;
  for (const auto& pr : st.particles) {
    for (int a = 0; a <= max_rank; ++a) {
      for (int b = 0; b <= std::min(kMaxMomentRank, max_rank - a); ++b) {
        const auto w = kernel_table(model, kind, zs, pr.Z, st.t, a, b);
        for (int k = b; k < kSeriesLength; ++k) {
          if (skip_order(k, opt.order, opt.even_reduction)) continue;
          h[a][k] += (st.kappa / kFactorial[b]) * contract_trailing(w, pr.moments.moment[b][k]);
        }
      }
    }
  }
  return h;
}

}  // namespace

MomentSet::MomentSet(int d) : phase_dim(d) {
  for (int m = 0; m <= kMaxMomentRank; ++m)
    for (int k = 0; k < kSeriesLength; ++k) moment[m][k] = Tensor<double>(d, m);
}

double MomentSet::total_mass(double hbar) const {
  double acc = 0.0;
  for (int k = 0; k < kSeriesLength; ++k) acc += std::pow(hbar, 0.5 * k) * mu(k);
  return acc;
}

double min_separation(const EnsembleState& state) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < state.size(); ++r)
    for (int s = r + 1; s < state.size(); ++s)
      best = std::min(best, (state.particles[r].Z.z() - state.particles[s].Z.z()).norm());
  return best;
}

EnsembleState he_rhs(const EnsembleState& state, const ModelSymbols& model, const HeOptions& opt) {
  if (opt.order < 0 || opt.order > 3)
    throw UnsupportedOrder("Hamilton-Ehrenfest order " + std::to_string(opt.order));
  if (state.size() < 1) throw DimensionMismatch("ensemble is empty");
  for (const auto& p : state.particles)
    if (p.Z.dim() != model.dim()) throw DimensionMismatch("particle dimension differs from model");

  if (state.kappa != 0.0 && !model.kernel_vanishes() && state.size() > 1) {
    const double threshold =
        opt.collision_threshold >= 0.0 ? opt.collision_threshold : 1e-3 * model.interaction_length();
    const double sep = min_separation(state);
    if (sep < threshold)
      throw CollisionError("quasiparticles collided (separation " + std::to_string(sep) + ")");
  }

  const int n = state.dim();
  const int d = 2 * n;
  const int M = opt.order;
  EnsembleState out = state;

  for (int s = 0; s < state.size(); ++s) {
    const auto& mom = state.particles[s].moments.moment;
    const auto H = expand_symbol(state, model, SymbolKind::hermitian, s, M + 1, opt);
    SymbolSeries B;
    if (state.lambda != 0.0) B = expand_symbol(state, model, SymbolKind::antihermitian, s, M, opt);

    const Tensor<double> zdot = apply_j_first(H[1][0]);
    auto& dst = out.particles[s];
    dst.Z = PhasePoint(-H[1][0].data().tail(n), H[1][0].data().head(n));
    dst.moments = MomentSet(d);

    for (int m = 0; m <= kMaxMomentRank; ++m) {
      for (int k = m; k <= M; ++k) {
        if (skip_order(k, M, opt.even_reduction)) continue;
        Tensor<double> acc(d, m);

        if (m >= 1) {
          // m Sym J_{ia} ⟨H_a Δz^{m-1}⟩
          Tensor<double> herm(d, m);
          for (int q = 0; q + m - 1 <= kMaxMomentRank && q + 1 <= M + 1; ++q) {
            const int r = q + m - 1;
            for (int k2 = r; k2 <= k; ++k2) {
              const int k1 = k - k2;
              if (opt.even_reduction && (k1 % 2 || k2 % 2)) continue;
              herm += (1.0 / kFactorial[q]) * contract(H[q + 1][k1], mom[r][k2], q);
            }
          }
          acc += double(m) * apply_j_first(herm);
          acc -= double(m) * outer(mom[m - 1][k], zdot);
        }

        if (state.lambda != 0.0) {
          // -Λ ⟨H̆ Δz^m + Δz^m H̆⟩
          for (int q = 0; q + m <= kMaxMomentRank && q <= M; ++q) {
            const int r = q + m;
            for (int k2 = r; k2 <= k; ++k2) {
              const int k1 = k - k2;
              if (opt.even_reduction && (k1 % 2 || k2 % 2)) continue;
              acc -= (state.lambda * 2.0 / kFactorial[q]) * contract(B[q][k1], mom[r][k2], q);
            }
          }
        }
        dst.moments.moment[m][k] = symmetrize(acc);
      }
    }
  }
  return out;
}

Eigen::VectorXd flatten(const EnsembleState& state) {
  Eigen::Index size = 0;
  for (const auto& p : state.particles) {
    size += 2 * p.Z.dim();
    for (const auto& row : p.moments.moment)
      for (const auto& t : row) size += t.size();
  }
  Eigen::VectorXd v(size);
  Eigen::Index o = 0;
  for (const auto& p : state.particles) {
    const auto n = p.Z.dim();
    v.segment(o, n) = p.Z.p;
    v.segment(o + n, n) = p.Z.x;
    o += 2 * n;
    for (const auto& row : p.moments.moment)
      for (const auto& t : row) {
        v.segment(o, t.size()) = t.data();
        o += t.size();
      }
  }
  return v;
}

void unflatten(const Eigen::VectorXd& v, EnsembleState& state) {
  Eigen::Index o = 0;
  for (auto& p : state.particles) {
    const auto n = p.Z.dim();
    p.Z.p = v.segment(o, n);
    p.Z.x = v.segment(o + n, n);
    o += 2 * n;
    for (auto& row : p.moments.moment)
      for (auto& t : row) {
        t.data() = v.segment(o, t.size());
        o += t.size();
      }
  }
  if (o != v.size()) throw DimensionMismatch("flattened state has the wrong length");
}

EnsembleState HeSeries::state_at(double time) const {
  if (t.empty()) throw InterpolationOutOfRange("empty trajectory");
  const double slack = 1e-12 * std::max(1.0, std::abs(t.back() - t.front()));
  if (time < t.front() - slack || time > t.back() + slack)
    throw InterpolationOutOfRange("time " + std::to_string(time) + " outside trajectory span");
  time = std::clamp(time, t.front(), t.back());
  auto it = std::upper_bound(t.begin(), t.end(), time);
  std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
  if (i + 1 >= t.size()) i = t.size() >= 2 ? t.size() - 2 : 0;
  EnsembleState out = states[i];
  out.t = time;
  if (t.size() == 1 || time == t[i]) return out;
  if (time == t[i + 1]) return states[i + 1];

  const double h = t[i + 1] - t[i];
  const double u = (time - t[i]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  const Eigen::VectorXd y = h00 * flatten(states[i]) + h10 * h * rates[i] +
                            h01 * flatten(states[i + 1]) + h11 * h * rates[i + 1];
  unflatten(y, out);
  return out;
}

HeSeries integrate_he(const EnsembleState& state0, const ModelSymbols& model, const HeOptions& opt,
                      double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_he: dt must be positive");
  if (!(t_end > state0.t)) throw std::invalid_argument("integrate_he: t_end must exceed start time");

  EnsembleState work = state0;
  auto f = [&](double time, const Eigen::VectorXd& y) {
    unflatten(y, work);
    work.t = time;
    return flatten(he_rhs(work, model, opt));
  };

  HeSeries series;
  series.options = opt;
  const double t0 = state0.t;
  const auto steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
  series.t.reserve(steps + 1);
  series.states.reserve(steps + 1);
  series.rates.reserve(steps + 1);

  Eigen::VectorXd y = flatten(state0);
  double time = t0;
  Eigen::VectorXd k1 = f(time, y);
  auto record = [&](double tt, const Eigen::VectorXd& yy, const Eigen::VectorXd& rate) {
    EnsembleState snap = state0;
    unflatten(yy, snap);
    snap.t = tt;
    series.separation.push_back(min_separation(snap));
    series.t.push_back(tt);
    series.states.push_back(std::move(snap));
    series.rates.push_back(rate);
  };
  record(time, y, k1);

  for (long i = 1; i <= steps; ++i) {
    const double t_next = i == steps ? t_end : t0 + i * dt;
    const double h = t_next - time;
    const Eigen::VectorXd k2 = f(time + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(time + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(time + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    time = t_next;
    if (!y.allFinite())
      throw NonFinite("Hamilton-Ehrenfest state became non-finite at t=" + std::to_string(time));
    k1 = f(time, y);
    record(time, y, k1);
  }
  return series;
}

QuasiparticleState gaussian_initial_moments(const GaussianParams& g, double hbar, bool normalized) {
  if (!(g.gamma > 0.0)) throw std::invalid_argument("gaussian: gamma must be positive");
  if (!(hbar > 0.0)) throw std::invalid_argument("gaussian: hbar must be positive");
  if (g.X0.size() != g.P0.size() || g.X0.size() < 1)
    throw DimensionMismatch("gaussian: X0 and P0 must have equal length");
  const int n = static_cast<int>(g.X0.size());
  QuasiparticleState q;
  q.Z = PhasePoint(g.P0, g.X0);
  q.moments = MomentSet(2 * n);
  const double mu = g.N * g.N * std::pow(g.gamma * std::sqrt(std::numbers::pi), n);
  q.moments.mu(0) = mu;
  const double scale = normalized ? 1.0 : mu;
  auto& d2 = q.moments.delta(2, 2);
  for (int i = 0; i < n; ++i) {
    d2(i, i) = scale / (2.0 * g.gamma * g.gamma);
    d2(n + i, n + i) = scale * g.gamma * g.gamma / 2.0;
  }
  return q;
}

double rest_width(double epsilon) {
  if (!(epsilon > 0.0)) throw NonpositiveEpsilon("rest_width requires epsilon > 0");
  return std::pow(epsilon, -0.25);
}

double linearized_period(double epsilon, double kappa, double gamma, double N, double c) {
  constexpr double pi = std::numbers::pi;
  const double c2 = c * c;
  const double corr = kappa * gamma * N * N * std::sqrt(pi) * c2 * (32.0 * pi * pi - 2.0 * c2) /
                      std::pow(c2 + 4.0 * pi * pi, 3.5);
  return 2.0 * pi * (epsilon + corr);
}

}  // namespace sqp
