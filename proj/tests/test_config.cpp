// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <numbers>

#include "sqp/config.hpp"
#include "sqp/errors.hpp"

using namespace sqp;
using std::numbers::pi;

namespace {

const std::string kBase = R"(
# two packets
[model]
name = dipole_cosine
epsilon = 1
c = 3
kappa = 2
lambda = 0.5
hbar = 0.1

[particle]
N = 1
gamma = 1
X0 = pi
P0 = 0

[particle]
X0 = -pi
gamma = 0.5

[he]
order = 2
dt = 1e-3
t_end = 5

[evolution]
enabled = true
x_min = -4*pi
x_max = 4*pi
x_points = 512
correction = yes
times = 0, 2.5, 5

[reference]
enabled = true
L = 4*pi
npoints = 1024
partition = 0

[outputs]
directory = out/test
sample_every = 20
emit = he_series, comparison
)";

std::string config_error_key(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("real literals with pi") {
    CHECK(parse_real("3.5") == 3.5);
    CHECK(parse_real("-pi") == doctest::Approx(-pi));
    CHECK(parse_real("2*pi") == doctest::Approx(2 * pi));
    CHECK(parse_real("pi/2") == doctest::Approx(pi / 2));
    CHECK(parse_real(" 1e-3 ") == 1e-3);
    CHECK_THROWS_AS(parse_real("pie"), std::invalid_argument);
    CHECK_THROWS_AS(parse_real(""), std::invalid_argument);
  }

  TEST_CASE("full config") {
    const auto c = parse_config(kBase);
    CHECK(c.model.name == "dipole_cosine");
    CHECK(c.model.params.at("epsilon") == 1.0);
    CHECK(c.model.params.at("c") == 3.0);
    CHECK(c.model.kappa == 2.0);
    CHECK(c.model.lambda == 0.5);
    CHECK(c.model.hbar == 0.1);
    REQUIRE(c.particles.size() == 2);
    CHECK(c.particles[0].X0[0] == doctest::Approx(pi));
    CHECK(c.particles[1].X0[0] == doctest::Approx(-pi));
    CHECK(c.particles[1].gamma == 0.5);
    CHECK(c.particles[1].N == 1.0);
    CHECK(c.he.order == 2);
    CHECK(c.evolution.correction);
    CHECK(c.evolution.times.size() == 3);
    CHECK(c.reference.L == doctest::Approx(4 * pi));
    CHECK(c.reference.partition == std::vector<double>{0.0});
    CHECK(c.outputs.sample_every == 20);
    CHECK(c.emits("he_series"));
    CHECK_FALSE(c.emits("density"));

    const auto st = c.initial_state();
    CHECK(st.size() == 2);
    CHECK(st.kappa == 2.0);
    CHECK(st.particles[1].moments.mu(0) == doctest::Approx(0.5 * std::sqrt(pi)));
    CHECK(c.he_options().order == 2);
  }

  TEST_CASE("overrides") {
    const auto c = parse_config(kBase, {"model.hbar=0.05", "particle.N=2", "particle2.P0=0.3", "he.order=3"});
    CHECK(c.model.hbar == 0.05);
    CHECK(c.particles[0].N == 2.0);
    CHECK(c.particles[1].N == 2.0);
    CHECK(c.particles[1].P0[0] == 0.3);
    CHECK(c.particles[0].P0[0] == 0.0);
    CHECK(c.he.order == 3);
    CHECK(config_error_key(kBase, {"particle3.N=1"}) == "particle3");
    CHECK(config_error_key(kBase, {"hbar=1"}) == "hbar=1");
  }

  TEST_CASE("missing hbar names the key") {
    CHECK(config_error_key(replace(kBase, "hbar = 0.1", "")) == "model.hbar");
  }

  TEST_CASE("schema violations") {
    CHECK(config_error_key(replace(kBase, "order = 2", "order = 2\ntolerance = 1")) == "he.tolerance");
    CHECK(config_error_key(replace(kBase, "[outputs]", "[plots]")) == "plots");
    CHECK(config_error_key(replace(kBase, "order = 2", "order = two")) == "he.order");
    CHECK(config_error_key(replace(kBase, "order = 2", "order = 5")) == "he.order");
    CHECK(config_error_key(replace(kBase, "t_end = 5", "")) == "he.t_end");
    CHECK(config_error_key(replace(kBase, "X0 = -pi", "")) == "particle2.X0");
    CHECK(config_error_key(replace(kBase, "X0 = -pi", "X0 = 1, 2")) == "particle2.X0");
    CHECK(config_error_key(replace(kBase, "gamma = 0.5", "gamma = 0")) == "particle2.gamma");
    CHECK(config_error_key(replace(kBase, "gamma = 0.5", "width = 1")) == "particle2.width");
    CHECK(config_error_key(replace(kBase, "npoints = 1024", "npoints = 1000")) == "reference.npoints");
    CHECK(config_error_key(replace(kBase, "correction = yes", "correction = maybe")) == "evolution.correction");
    CHECK(config_error_key(replace(kBase, "times = 0, 2.5, 5", "times = 0, 7")) == "evolution.times");
    CHECK(config_error_key(replace(kBase, "emit = he_series, comparison", "emit = plots")) == "outputs.emit");
    CHECK(config_error_key(replace(kBase, "c = 3", "")) == "model");
    CHECK(config_error_key(replace(kBase, "c = 3", "c = 3\nradius = 2")) == "model");
    CHECK(config_error_key(replace(kBase, "[model]", "name_outside = 1\n[model]")) == "line 3");
    CHECK(config_error_key(replace(kBase, "kappa = 2", "kappa 2")) == "line 7");
  }

  TEST_CASE("reference solver needs the dipole-cosine model") {
    const std::string harmonic = R"(
[model]
name = harmonic
hbar = 0.1
[particle]
X0 = 0.5
[he]
t_end = 1
[reference]
enabled = true
L = 10
npoints = 256
)";
    CHECK(config_error_key(harmonic) == "reference.enabled");
    CHECK_NOTHROW(parse_config(replace(harmonic, "enabled = true", "enabled = false")));
  }

  TEST_CASE("bundled scenarios parse") {
    const std::filesystem::path dir = std::filesystem::path(SQP_SOURCE_DIR) / "scenarios";
    int count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() != ".cfg") continue;
      CAPTURE(entry.path().string());
      CHECK_NOTHROW(load_config(entry.path()));
      ++count;
    }
    CHECK(count >= 7);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), ConfigError);
  }
}
