#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dcc/config.hpp"
#include "dcc/mobility.hpp"

using namespace dcc;
using namespace std::chrono_literals;

namespace {

// Advances a world by `seconds` at the default 100 ms tick.
void advance(World& w, double seconds) {
  const int n = static_cast<int>(std::lround(seconds * 10));
  for (int i = 0; i < n; ++i) w.tick(100ms);
}

double mean_speed_after(double density, double warm, double measure) {
  ScenarioSpec s = default_config(ScenarioKind::Oval).scenario;
  s.density = density;
  World w = World::build(s, 1);
  advance(w, warm);
  double sum = 0;
  int n = 0;
  for (int i = 0; i < static_cast<int>(measure * 10); ++i) {
    w.tick(100ms);
    if (i % 10 == 0) {
      sum += w.mean_speed();
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST_CASE("path poses on straights and arcs") {
  Path p({0, 0}, 0);
  p.straight(100).arc(50, 90).straight(10);
  CHECK(p.length() == doctest::Approx(100 + 50 * std::numbers::pi / 2 + 10));
  const Pose a = p.at(40);
  CHECK(a.position.x == doctest::Approx(40));
  CHECK(a.position.y == doctest::Approx(0));
  CHECK(a.heading_deg == doctest::Approx(0));
  // Quarter circle to the left around (100, 50).
  const Pose mid = p.at(100 + 50 * std::numbers::pi / 4);
  CHECK(mid.position.x == doctest::Approx(100 + 50 * std::sin(std::numbers::pi / 4)));
  CHECK(mid.position.y == doctest::Approx(50 - 50 * std::cos(std::numbers::pi / 4)));
  CHECK(mid.heading_deg == doctest::Approx(45));
  const Pose end = p.at(p.length());
  CHECK(end.position.x == doctest::Approx(150));
  CHECK(end.position.y == doctest::Approx(60));
  CHECK(end.heading_deg == doctest::Approx(90));
  // Left offset of a straight heading east is +y.
  CHECK(p.at(10, 3.5).position.y == doctest::Approx(3.5));
  // Beyond the end the path continues straight.
  CHECK(p.at(p.length() + 5).position.y == doctest::Approx(65));
}

TEST_CASE("scenario populations") {
  ScenarioSpec oval = default_config(ScenarioKind::Oval).scenario;
  oval.density = 10;
  CHECK(World::build(oval, 1).size() == 310);
  CHECK(World::build(default_config(ScenarioKind::TrafficLight).scenario, 1).size() == 300);
  const World j = World::build(default_config(ScenarioKind::Junction).scenario, 1);
  CHECK(j.size() == 325);
  CHECK(j.group_names() == std::vector<std::string>{"large", "small"});
}

TEST_CASE("idm equilibrium speed has zero acceleration") {
  kernels::IdmParams p;
  for (double gap : {5.0, 15.0, 30.0, 60.0}) {
    const double v = idm_equilibrium_speed(p, gap, 30.0);
    // Independent evaluation of the IDM law at equal speeds.
    const double s_star = p.min_gap + v * p.headway;
    const double a = p.max_accel * (1 - std::pow(v / 30.0, 4) - (s_star / gap) * (s_star / gap));
    CHECK(std::abs(a) < 1e-6);
    CHECK(v < 30.0);
  }
}

TEST_CASE("idm kernel against the closed form") {
  kernels::IdmParams p;
  const std::vector<double> gap{20.0, std::numeric_limits<double>::infinity(), 3.0};
  const std::vector<double> v{15.0, 10.0, 12.0};
  const std::vector<double> lead{15.0, 0.0, 0.0};
  const std::vector<double> v0{30.0, 30.0, 30.0};
  std::vector<double> out(3);
  kernels::serial::idm_accelerations(p, {gap, v, lead, v0}, out);
  const double s0 = 2.5 + 15.0;
  CHECK(out[0] == doctest::Approx(2.6 * (1 - std::pow(0.5, 4) - (s0 / 20) * (s0 / 20))));
  CHECK(out[1] == doctest::Approx(2.6 * (1 - std::pow(1.0 / 3, 4))));
  CHECK(out[2] == doctest::Approx(-9.0));  // emergency braking is capped
}

TEST_CASE("traffic light: queued at rest, moving within 30 s of release") {
  World w = World::build(default_config(ScenarioKind::TrafficLight).scenario, 3);
  CHECK(w.red_light());
  for (std::uint32_t i = 0; i < w.size(); ++i) CHECK(w.speed(i) == 0.0);
  advance(w, 5);
  for (std::uint32_t i = 0; i < w.size(); ++i) CHECK(w.speed(i) == 0.0);
  CHECK(w.min_gap() >= default_config(ScenarioKind::TrafficLight).scenario.idm.min_gap);
  w.release();
  std::vector<bool> moved(w.size(), false);
  for (int k = 0; k < 300; ++k) {
    w.tick(100ms);
    for (std::uint32_t i = 0; i < w.size(); ++i)
      if (w.speed(i) > 0.5) moved[i] = true;
  }
  for (std::uint32_t i = 0; i < w.size(); ++i) CHECK(moved[i]);
  CHECK(w.min_gap() > 0.0);
}

TEST_CASE("junction groups meet at the origin") {
  const RunConfig c = default_config(ScenarioKind::Junction);
  World w = World::build(c.scenario, 1);
  const double pre = to_seconds(c.scenario.preroll);
  advance(w, pre - 1.0);
  CHECK(w.min_group_distance() > 750.0);
  advance(w, 2.0);
  CHECK(w.min_group_distance() <= 750.0);
  // The platoon turns onto the highway eventually.
  advance(w, 60.0);
  CHECK(w.min_group_distance() < 50.0);
}

TEST_CASE("oval speeds follow density") {
  const double v10 = mean_speed_after(10, 60, 60);
  CHECK(v10 >= 24.0);
  CHECK(v10 <= 29.0);
  double prev = v10;
  for (double d : {20.0, 30.0, 40.0, 50.0, 60.0}) {
    const double v = mean_speed_after(d, 60, 60);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("oval keeps vehicles apart and on the loop") {
  ScenarioSpec s = default_config(ScenarioKind::Oval).scenario;
  s.density = 60;
  World w = World::build(s, 2);
  advance(w, 30);
  CHECK(w.min_gap() > 0.0);
  for (std::uint32_t i = 0; i < w.size(); ++i) {
    CHECK(w.arc_position(i) >= 0.0);
    CHECK(w.arc_position(i) < s.loop_length_m);
    CHECK(w.speed(i) >= 0.0);
  }
}

TEST_CASE("range queries match brute force") {
  ScenarioSpec s = default_config(ScenarioKind::Oval).scenario;
  s.density = 30;
  World w = World::build(s, 4);
  advance(w, 5);
  std::vector<std::uint32_t> got;
  for (std::uint32_t i = 0; i < w.size(); i += 37) {
    got.clear();
    w.within(w.position(i), 750.0, got);
    std::sort(got.begin(), got.end());
    std::vector<std::uint32_t> want;
    for (std::uint32_t j = 0; j < w.size(); ++j)
      if (w.distance(w.position(i), w.position(j)) <= 750.0) want.push_back(j);
    CHECK(got == want);
  }
}

TEST_CASE("scenario validation") {
  ScenarioSpec s;
  s.density = 500;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  ScenarioSpec t;
  t.lanes = 3;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  CHECK_THROWS_AS(parse_scenario("ring"), ConfigError);
  CHECK(parse_scenario("junction") == ScenarioKind::Junction);
  CHECK(parse_roi("curve") == Roi::Curve);
}
