// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include "sqp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "sqp/errors.hpp"
#include "sqp/symbols.hpp"

namespace sqp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double real_or_throw(const std::string& key, const std::string& v) {
  try {
    return parse_real(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key, e.what());
  }
}

int int_or_throw(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

bool bool_or_throw(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + v + "'");
}

std::vector<double> list_or_throw(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(real_or_throw(key, item));
  return out;
}

class Parser {
 public:
  explicit Parser(ScenarioConfig& cfg) : cfg_(cfg) {}

  void set(const std::string& section, const std::string& key, const std::string& value,
           int particle) {
    const std::string path =
        section == "particle" ? "particle" + std::to_string(particle + 1) + "." + key : section + "." + key;
    seen_.insert(path);
    if (section == "model") return model(path, key, value);
    if (section == "particle") return particle_key(path, key, value, particle);
    if (section == "he") return he(path, key, value);
    if (section == "evolution") return evolution(path, key, value);
    if (section == "reference") return reference(path, key, value);
    if (section == "outputs") return outputs(path, key, value);
    throw ConfigError(section, "unknown section");
  }

  bool seen(const std::string& path) const { return seen_.count(path) > 0; }

 private:
  void model(const std::string& path, const std::string& key, const std::string& v) {
    auto& m = cfg_.model;
    if (key == "name") {
      m.name = v;
    } else if (key == "kappa") {
      m.kappa = real_or_throw(path, v);
    } else if (key == "lambda") {
      m.lambda = real_or_throw(path, v);
    } else if (key == "hbar") {
      m.hbar = real_or_throw(path, v);
    } else if (key == "moments") {
      if (v != "unnormalized" && v != "normalized")
        throw ConfigError(path, "expected 'unnormalized' or 'normalized'");
      m.normalized_moments = v == "normalized";
    } else {
      m.params[key] = real_or_throw(path, v);
    }
  }

  void particle_key(const std::string& path, const std::string& key, const std::string& v, int i) {
    auto& p = cfg_.particles.at(static_cast<std::size_t>(i));
    if (key == "N") {
      p.N = real_or_throw(path, v);
    } else if (key == "gamma") {
      p.gamma = real_or_throw(path, v);
    } else if (key == "X0") {
      p.X0 = list_or_throw(path, v);
    } else if (key == "P0") {
      p.P0 = list_or_throw(path, v);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }

  void he(const std::string& path, const std::string& key, const std::string& v) {
    auto& h = cfg_.he;
    if (key == "order") {
      h.order = int_or_throw(path, v);
    } else if (key == "even_reduction") {
      h.even_reduction = bool_or_throw(path, v);
    } else if (key == "dt") {
      h.dt = real_or_throw(path, v);
    } else if (key == "t_end") {
      h.t_end = real_or_throw(path, v);
    } else if (key == "collision_threshold") {
      h.collision_threshold = real_or_throw(path, v);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }

  void evolution(const std::string& path, const std::string& key, const std::string& v) {
    auto& e = cfg_.evolution;
    if (key == "enabled") {
      e.enabled = bool_or_throw(path, v);
    } else if (key == "x_min") {
      e.x_min = real_or_throw(path, v);
    } else if (key == "x_max") {
      e.x_max = real_or_throw(path, v);
    } else if (key == "x_points") {
      e.x_points = int_or_throw(path, v);
    } else if (key == "correction") {
      e.correction = bool_or_throw(path, v);
    } else if (key == "quad_steps") {
      e.quad_steps = int_or_throw(path, v);
    } else if (key == "times") {
      e.times = list_or_throw(path, v);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }

  void reference(const std::string& path, const std::string& key, const std::string& v) {
    auto& r = cfg_.reference;
    if (key == "enabled") {
      r.enabled = bool_or_throw(path, v);
    } else if (key == "L") {
      r.L = real_or_throw(path, v);
    } else if (key == "npoints") {
      r.npoints = int_or_throw(path, v);
    } else if (key == "dt") {
      r.dt = real_or_throw(path, v);
    } else if (key == "partition") {
      r.partition = list_or_throw(path, v);
    } else {
      throw ConfigError(path, "unknown key");
    }
  }

  void outputs(const std::string& path, const std::string& key, const std::string& v) {
    auto& o = cfg_.outputs;
    if (key == "directory") {
      o.directory = v;
    } else if (key == "sample_every") {
      o.sample_every = int_or_throw(path, v);
    } else if (key == "emit") {
      static const std::set<std::string> known{"he_series", "density", "observables", "comparison"};
      o.emit.clear();
      for (const auto& item : split(v, ',')) {
        if (item.empty()) continue;
        if (!known.count(item)) throw ConfigError(path, "unknown artifact '" + item + "'");
        o.emit.insert(item);
      }
    } else {
      throw ConfigError(path, "unknown key");
    }
  }

  ScenarioConfig& cfg_;
  std::set<std::string> seen_;
};

void validate(const ScenarioConfig& c, const Parser& parser) {
  if (!parser.seen("model.name")) throw ConfigError("model.name", "required key is missing");
  if (!parser.seen("model.hbar")) throw ConfigError("model.hbar", "required key is missing");
  if (!(c.model.hbar > 0.0)) throw ConfigError("model.hbar", "must be positive");
  std::unique_ptr<ModelSymbols> model;
  try {
    model = make_model(c.model.name, c.model.params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  if (c.particles.empty()) throw ConfigError("particle", "at least one [particle] section is required");
  const auto n = static_cast<std::size_t>(model->dim());
  for (std::size_t i = 0; i < c.particles.size(); ++i) {
    const auto& p = c.particles[i];
    const std::string base = "particle" + std::to_string(i + 1) + ".";
    if (p.X0.empty()) throw ConfigError(base + "X0", "required key is missing");
    if (p.X0.size() != n) throw ConfigError(base + "X0", "expected " + std::to_string(n) + " components");
    if (!p.P0.empty() && p.P0.size() != n)
      throw ConfigError(base + "P0", "expected " + std::to_string(n) + " components");
    if (!(p.gamma > 0.0)) throw ConfigError(base + "gamma", "must be positive");
  }
  if (!parser.seen("he.t_end")) throw ConfigError("he.t_end", "required key is missing");
  if (!(c.he.t_end > 0.0)) throw ConfigError("he.t_end", "must be positive");
  if (!(c.he.dt > 0.0)) throw ConfigError("he.dt", "must be positive");
  if (c.he.order < 0 || c.he.order > 3) throw ConfigError("he.order", "must be in 0..3");
  if (c.evolution.enabled) {
    if (n != 1) throw ConfigError("evolution.enabled", "wave function assembly needs a 1D model");
    if (c.evolution.x_points < 2) throw ConfigError("evolution.x_points", "must be at least 2");
    if (!(c.evolution.x_max > c.evolution.x_min)) throw ConfigError("evolution.x_max", "must exceed x_min");
    if (c.evolution.quad_steps < 1) throw ConfigError("evolution.quad_steps", "must be positive");
    for (double t : c.evolution.times)
      if (t < 0.0 || t > c.he.t_end) throw ConfigError("evolution.times", "times must lie in [0, t_end]");
  }
  if (c.reference.enabled) {
    if (c.model.name != "dipole_cosine")
      throw ConfigError("reference.enabled", "the reference solver supports the dipole_cosine model only");
    if (!(c.reference.L > 0.0)) throw ConfigError("reference.L", "must be positive");
    const int np = c.reference.npoints;
    if (np < 256 || (np & (np - 1)) != 0)
      throw ConfigError("reference.npoints", "must be a power of two >= 256");
    if (!(c.reference.dt > 0.0)) throw ConfigError("reference.dt", "must be positive");
    if (!std::is_sorted(c.reference.partition.begin(), c.reference.partition.end()))
      throw ConfigError("reference.partition", "must be ascending");
  }
  if (c.outputs.sample_every < 1) throw ConfigError("outputs.sample_every", "must be positive");
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty number");
  std::size_t pos = 0;
  double sign = 1.0;
  if (s[0] == '-' || s[0] == '+') {
    if (s[0] == '-') sign = -1.0;
    pos = 1;
  }
  double value = 1.0;
  char op = '*';
  while (true) {
    const auto end = s.find_first_of("*/", pos);
    const std::string tok = trim(s.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    double f = 0.0;
    if (tok == "pi") {
      f = std::numbers::pi;
    } else {
      const auto* last = tok.data() + tok.size();
      const auto res = std::from_chars(tok.data(), last, f);
      if (tok.empty() || res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    value = op == '*' ? value * f : value / f;
    if (end == std::string::npos) break;
    op = s[end];
    pos = end + 1;
  }
  return sign * value;
}

ScenarioConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  ScenarioConfig cfg;
  Parser parser(cfg);
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno), "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section == "particle") cfg.particles.emplace_back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno), "key outside of any section");
    parser.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
               static_cast<int>(cfg.particles.size()) - 1);
  }

  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    const auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError(ov, "override must look like section.key=value");
    const std::string sec = trim(ov.substr(0, dot));
    const std::string key = trim(ov.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(ov.substr(eq + 1));
    if (sec == "particle") {
      for (std::size_t i = 0; i < cfg.particles.size(); ++i) parser.set(sec, key, value, static_cast<int>(i));
    } else if (sec.rfind("particle", 0) == 0) {
      const int idx = int_or_throw(sec, sec.substr(8));
      if (idx < 1 || idx > static_cast<int>(cfg.particles.size()))
        throw ConfigError(sec, "no such particle");
      parser.set("particle", key, value, idx - 1);
    } else {
      parser.set(sec, key, value, -1);
    }
  }

  validate(cfg, parser);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

HeOptions ScenarioConfig::he_options() const {
  HeOptions o;
  o.order = he.order;
  o.even_reduction = he.even_reduction;
  o.collision_threshold = he.collision_threshold;
  return o;
}

std::vector<GaussianParams> ScenarioConfig::gaussians() const {
  std::vector<GaussianParams> out;
  for (const auto& p : particles) {
    GaussianParams g;
    g.N = p.N;
    g.gamma = p.gamma;
    g.X0 = Eigen::Map<const Eigen::VectorXd>(p.X0.data(), static_cast<Eigen::Index>(p.X0.size()));
    g.P0 = p.P0.empty() ? Eigen::VectorXd::Zero(g.X0.size())
                        : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                              p.P0.data(), static_cast<Eigen::Index>(p.P0.size())));
    out.push_back(g);
  }
  return out;
}

EnsembleState ScenarioConfig::initial_state() const {
  EnsembleState st;
  st.hbar = model.hbar;
  st.kappa = model.kappa;
  st.lambda = model.lambda;
  st.normalized_moments = model.normalized_moments;
  for (const auto& g : gaussians())
    st.particles.push_back(gaussian_initial_moments(g, model.hbar, model.normalized_moments));
  return st;
}

}  // namespace sqp
