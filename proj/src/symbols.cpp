// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sqp/errors.hpp"

namespace sqp {

PhasePoint::PhasePoint(Eigen::VectorXd p_, Eigen::VectorXd x_) : p(std::move(p_)), x(std::move(x_)) {
  if (p.size() != x.size() || x.size() < 1)
    throw DimensionMismatch("PhasePoint: p and x must have equal length >= 1");
}

PhasePoint PhasePoint::from_z(const Eigen::VectorXd& z) {
  if (z.size() % 2 != 0 || z.size() == 0) throw DimensionMismatch("PhasePoint: odd phase vector");
  const auto n = z.size() / 2;
  return PhasePoint(z.head(n), z.tail(n));
}

PhasePoint PhasePoint::scalar(double p, double x) {
  return PhasePoint(Eigen::VectorXd::Constant(1, p), Eigen::VectorXd::Constant(1, x));
}

Eigen::VectorXd PhasePoint::z() const {
  Eigen::VectorXd out(2 * p.size());
  out << p, x;
  return out;
}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  for (int e : entries_)
    if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
}

MultiIndex MultiIndex::zero(int phase_dim) { return MultiIndex(std::vector<int>(phase_dim, 0)); }

MultiIndex MultiIndex::from_coordinates(int phase_dim, const std::vector<int>& coords) {
  std::vector<int> e(phase_dim, 0);
  for (int c : coords) {
    if (c < 0 || c >= phase_dim) throw std::out_of_range("MultiIndex: coordinate out of range");
    ++e[c];
  }
  return MultiIndex(std::move(e));
}

int MultiIndex::order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

int MultiIndex::momentum_order() const {
  const int n = phase_dim() / 2;
  return std::accumulate(entries_.begin(), entries_.begin() + n, 0);
}

int MultiIndex::position_order() const {
  const int n = phase_dim() / 2;
  return std::accumulate(entries_.begin() + n, entries_.end(), 0);
}

MultiIndex MultiIndex::raised(int coord) const {
  auto e = entries_;
  ++e.at(coord);
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::lowered(int coord) const {
  auto e = entries_;
  if (e.at(coord) == 0) throw std::invalid_argument("MultiIndex: cannot lower a zero entry");
  --e[coord];
  return MultiIndex(std::move(e));
}

namespace {

void check_dim(const ModelSymbols& model, const PhasePoint& z) {
  if (z.dim() != model.dim() || z.p.size() != z.x.size()) {
    std::ostringstream os;
    os << "model " << model.name() << " has n=" << model.dim() << ", point has n=" << z.dim();
    throw DimensionMismatch(os.str());
  }
}

void check_index(const ModelSymbols& model, const MultiIndex& a) {
  if (a.phase_dim() != 2 * model.dim()) throw DimensionMismatch("multi-index length must be 2n");
}

}  // namespace

double potential_partial(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z, double t,
                         const MultiIndex& alpha) {
  check_dim(model, z);
  check_index(model, alpha);
  if (alpha.order() > max_order(kind))
    throw UnsupportedOrder("potential partial of order " + std::to_string(alpha.order()));
  return model.potential(kind, z, t, alpha);
}

double kernel_partial(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                      const PhasePoint& w, double t, const MultiIndex& alpha,
                      const MultiIndex& beta) {
  check_dim(model, z);
  check_dim(model, w);
  check_index(model, alpha);
  check_index(model, beta);
  if (alpha.order() + beta.order() > max_order(kind))
    throw UnsupportedOrder("kernel partial of order " + std::to_string(alpha.order() + beta.order()));
  return model.kernel(kind, z, w, t, alpha, beta);
}

Tensor<double> potential_table(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                               double t, int order) {
  const int d = 2 * model.dim();
  Tensor<double> out(d, order);
  for (const auto& tuple : sorted_index_tuples(d, order)) {
    const double v = potential_partial(model, kind, z, t, MultiIndex::from_coordinates(d, tuple));
    auto idx = tuple;
    do {
      out.at(idx) = v;
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
  return out;
}

Tensor<double> kernel_table(const ModelSymbols& model, SymbolKind kind, const PhasePoint& z,
                            const PhasePoint& w, double t, int z_order, int w_order) {
  const int d = 2 * model.dim();
  Tensor<double> out(d, z_order + w_order);
  if (model.kernel_vanishes()) return out;
  const auto zt = sorted_index_tuples(d, z_order);
  const auto wt = sorted_index_tuples(d, w_order);
  for (const auto& a : zt) {
    const auto ma = MultiIndex::from_coordinates(d, a);
    for (const auto& b : wt) {
      const double v =
          kernel_partial(model, kind, z, w, t, ma, MultiIndex::from_coordinates(d, b));
      auto ia = a;
      do {
        auto ib = b;
        do {
          std::vector<int> idx(ia);
          idx.insert(idx.end(), ib.begin(), ib.end());
          out.at(idx) = v;
        } while (std::next_permutation(ib.begin(), ib.end()));
      } while (std::next_permutation(ia.begin(), ia.end()));
    }
  }
  return out;
}

// -- DipoleCosineModel -----------------------------------------------------

DipoleCosineModel::DipoleCosineModel(double epsilon, double c, bool far_field)
    : epsilon_(epsilon), c_(c), far_field_(far_field) {
  if (!(c > 0.0)) throw std::invalid_argument("dipole_cosine: c must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("dipole_cosine: epsilon must be positive");
}

double DipoleCosineModel::potential(SymbolKind, const PhasePoint& z, double,
                                    const MultiIndex& alpha) const {
  const int ap = alpha[0];
  const int ax = alpha[1];
  const double p = z.p[0];
  const double x = z.x[0];
  if (ap > 0 && ax > 0) return 0.0;
  if (ax == 0) {
    switch (ap) {
      case 0: return 0.5 * p * p + epsilon_ * std::cos(x);
      case 1: return p;
      case 2: return 1.0;
      default: return 0.0;
    }
  }
  switch (ax % 4) {
    case 0: return epsilon_ * std::cos(x);
    case 1: return -epsilon_ * std::sin(x);
    case 2: return -epsilon_ * std::cos(x);
    default: return epsilon_ * std::sin(x);
  }
}

double DipoleCosineModel::radial_derivative(double r, int m) const {
  const double c2 = c_ * c_;
  const double r2 = r * r;
  if (far_field_ && r != 0.0) {
    const double a = std::abs(r);
    switch (m) {
      case 0: return c2 / (a * a * a);
      case 1: return -3.0 * c2 * r / std::pow(a, 5);
      case 2: return 12.0 * c2 / std::pow(a, 5);
      case 3: return -60.0 * c2 * r / std::pow(a, 7);
      case 4: return 360.0 * c2 / std::pow(a, 7);
      default: throw UnsupportedOrder("dipole kernel derivative order > 4");
    }
  }
  const double u = r2 + c2;
  const double su = std::sqrt(u);
  // u^{-k/2} built from one sqrt
  const double u3 = 1.0 / (u * su);
  switch (m) {
    case 0: return c2 * u3;
    case 1: return -3.0 * c2 * r * u3 / u;
    case 2: return 3.0 * c2 * (4.0 * r2 - c2) * u3 / (u * u);
    case 3: return 15.0 * c2 * r * (3.0 * c2 - 4.0 * r2) * u3 / (u * u * u);
    case 4:
      return 45.0 * c2 * (8.0 * r2 * r2 - 12.0 * c2 * r2 + c2 * c2) * u3 / (u * u * u * u);
    default: throw UnsupportedOrder("dipole kernel derivative order > 4");
  }
}

double DipoleCosineModel::kernel(SymbolKind, const PhasePoint& z, const PhasePoint& w, double,
                                 const MultiIndex& alpha, const MultiIndex& beta) const {
  if (alpha[0] > 0 || beta[0] > 0) return 0.0;
  const int m = alpha[1] + beta[1];
  const double g = radial_derivative(z.x[0] - w.x[0], m);
  // ∂/∂y = -∂/∂R
  return (beta[1] % 2 == 0) ? g : -g;
}

// -- HarmonicModel ---------------------------------------------------------

HarmonicModel::HarmonicModel(int n, double omega) : n_(n), omega_(omega) {
  if (n < 1) throw std::invalid_argument("harmonic: n must be >= 1");
}

double HarmonicModel::potential(SymbolKind kind, const PhasePoint& z, double,
                                const MultiIndex& alpha) const {
  if (kind == SymbolKind::antihermitian) return 0.0;
  const int order = alpha.order();
  if (order == 0) return 0.5 * (z.p.squaredNorm() + omega_ * omega_ * z.x.squaredNorm());
  if (order > 2) return 0.0;
  // exactly one coordinate carries the whole order
  int coord = -1;
  for (int i = 0; i < alpha.phase_dim(); ++i)
    if (alpha[i] > 0) {
      if (coord >= 0) return 0.0;
      coord = i;
    }
  const bool is_x = coord >= n_;
  const double scale = is_x ? omega_ * omega_ : 1.0;
  if (order == 2) return scale;
  return is_x ? scale * z.x[coord - n_] : z.p[coord];
}

// -- FreeParticleModel -----------------------------------------------------

double FreeParticleModel::potential(SymbolKind kind, const PhasePoint& z, double,
                                    const MultiIndex& alpha) const {
  if (kind == SymbolKind::antihermitian) return 0.0;
  const int order = alpha.order();
  if (alpha.position_order() > 0) return 0.0;
  if (order == 0) return 0.5 * z.p.squaredNorm();
  if (order > 2) return 0.0;
  int coord = -1;
  for (int i = 0; i < n_; ++i)
    if (alpha[i] > 0) {
      if (coord >= 0) return 0.0;
      coord = i;
    }
  return order == 2 ? 1.0 : z.p[coord];
}

// -- factory ---------------------------------------------------------------

std::unique_ptr<ModelSymbols> make_model(const std::string& name,
                                         const std::map<std::string, double>& params) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto allow_only = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : params) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw std::invalid_argument("model " + name + " does not take parameter '" + k + "'");
    }
  };
  if (name == "dipole_cosine" || name == "dipole_cosine_far") {
    allow_only({"epsilon", "c"});
    if (!params.count("epsilon") || !params.count("c"))
      throw std::invalid_argument("model " + name + " requires epsilon and c");
    return std::make_unique<DipoleCosineModel>(params.at("epsilon"), params.at("c"),
                                               name == "dipole_cosine_far");
  }
  if (name == "harmonic") {
    allow_only({"n", "omega"});
    return std::make_unique<HarmonicModel>(static_cast<int>(get("n", 1.0)), get("omega", 1.0));
  }
  if (name == "free") {
    allow_only({"n"});
    return std::make_unique<FreeParticleModel>(static_cast<int>(get("n", 1.0)));
  }
  throw std::invalid_argument("unknown model '" + name + "'");
}

// -- finite-difference oracle ----------------------------------------------

double FdReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

namespace {

double rel_error(double analytic, double fd) {
  const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-6});
  return std::abs(analytic - fd) / scale;
}

PhasePoint shifted(const PhasePoint& z, int coord, double delta) {
  auto v = z.z();
  v[coord] += delta;
  return PhasePoint::from_z(v);
}

}  // namespace

FdReport check_partials_fd(const ModelSymbols& model, const std::vector<FdSample>& samples,
                           double tolerance, double h) {
  FdReport report;
  report.tolerance = tolerance;
  const int d = 2 * model.dim();

  for (SymbolKind kind : {SymbolKind::hermitian, SymbolKind::antihermitian}) {
    const std::string vname = kind == SymbolKind::hermitian ? "V" : "Vb";
    const std::string wname = kind == SymbolKind::hermitian ? "W" : "Wb";
    for (int order = 1; order <= max_order(kind); ++order) {
      double worst_v = 0.0;
      double worst_w = 0.0;
      for (const auto& s : samples) {
        for (const auto& tuple : sorted_index_tuples(d, order)) {
          const auto alpha = MultiIndex::from_coordinates(d, tuple);
          const int j = tuple.back();
          const auto lower = alpha.lowered(j);
          const double hj = h * std::max(1.0, std::abs(s.z.z()[j]));
          const double fd = (model.potential(kind, shifted(s.z, j, hj), s.t, lower) -
                             model.potential(kind, shifted(s.z, j, -hj), s.t, lower)) /
                            (2.0 * hj);
          worst_v = std::max(worst_v, rel_error(model.potential(kind, s.z, s.t, alpha), fd));
        }
        // kernel: split the order between z and w in every possible way
        for (int q = 0; q <= order; ++q) {
          const int p = order - q;
          for (const auto& ta : sorted_index_tuples(d, q)) {
            for (const auto& tb : sorted_index_tuples(d, p)) {
              const auto alpha = MultiIndex::from_coordinates(d, ta);
              const auto beta = MultiIndex::from_coordinates(d, tb);
              double fd = 0.0;
              if (q > 0) {
                const int j = ta.back();
                const double hj = h * std::max(1.0, std::abs(s.z.z()[j]));
                const auto la = alpha.lowered(j);
                fd = (model.kernel(kind, shifted(s.z, j, hj), s.w, s.t, la, beta) -
                      model.kernel(kind, shifted(s.z, j, -hj), s.w, s.t, la, beta)) /
                     (2.0 * hj);
              } else {
                const int j = tb.back();
                const double hj = h * std::max(1.0, std::abs(s.w.z()[j]));
                const auto lb = beta.lowered(j);
                fd = (model.kernel(kind, s.z, shifted(s.w, j, hj), s.t, alpha, lb) -
                      model.kernel(kind, s.z, shifted(s.w, j, -hj), s.t, alpha, lb)) /
                     (2.0 * hj);
              }
              worst_w =
                  std::max(worst_w, rel_error(model.kernel(kind, s.z, s.w, s.t, alpha, beta), fd));
            }
          }
        }
      }
      report.entries.push_back({vname, order, worst_v});
      report.entries.push_back({wname, order, worst_w});
      report.passed = report.passed && worst_v <= tolerance && worst_w <= tolerance;
    }
  }
  return report;
}

}  // namespace sqp
