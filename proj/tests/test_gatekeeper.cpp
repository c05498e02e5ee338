#include <doctest.h>

#include <algorithm>
#include <array>
#include <deque>

#include "dcc/gatekeeper.hpp"
#include "dcc/rng.hpp"

using namespace dcc;
using namespace std::chrono_literals;

namespace {

Frame frame(DataProfile dp, std::uint64_t id = 0) {
  Frame f;
  f.id = id;
  f.profile = dp;
  return f;
}

}  // namespace

TEST_CASE("next_tx_wait clamps to [25 ms, 1 s]") {
  CHECK(next_tx_wait(500us, 0.03) == 25ms);
  CHECK(next_tx_wait(500us, 0.0006) == Duration{833333});
  CHECK(next_tx_wait(500us, 0.0001) == 1s);
  CHECK(next_tx_wait(500us, 0.0) == kGateClosed);
  CHECK_THROWS_AS(next_tx_wait(0us, 0.01), InputError);
  CHECK_THROWS_AS(next_tx_wait(500us, -0.1), InputError);
  CHECK(rate_cap_wait(20) == 50ms);
  CHECK(rate_cap_wait(100) == 25ms);
  CHECK(rate_cap_wait(0.5) == 1s);
  CHECK(rate_cap_wait(0) == kGateClosed);
}

TEST_CASE("highest priority queue is served first") {
  Gatekeeper g;
  g.set_limit(GateLimit::share(0.03));
  REQUIRE(g.enqueue(frame(DataProfile::DP3, 1)));
  REQUIRE(g.enqueue(frame(DataProfile::DP2, 2)));
  auto f = g.on_gate_open(SimTime{0});
  REQUIRE(f);
  CHECK(f->id == 2);
  CHECK(g.busy());
  CHECK_FALSE(g.on_gate_open(SimTime{0}));
}

TEST_CASE("queue capacity and tail drop") {
  Gatekeeper g(2);
  CHECK(g.enqueue(frame(DataProfile::DP3)) == 1u);
  CHECK(g.enqueue(frame(DataProfile::DP3)) == 2u);
  CHECK_FALSE(g.enqueue(frame(DataProfile::DP3)));
  CHECK(g.drops(DataProfile::DP3) == 1);
  CHECK(g.enqueue(frame(DataProfile::DP2)) == 1u);
  CHECK(g.total_depth() == 3);
  Frame empty = frame(DataProfile::DP2);
  empty.payload_bytes = 0;
  CHECK_THROWS_AS(g.enqueue(empty), InputError);
}

TEST_CASE("gate re-arms after each transmission") {
  Gatekeeper g;
  g.set_limit(GateLimit::share(0.03));
  g.enqueue(frame(DataProfile::DP3));
  g.enqueue(frame(DataProfile::DP2));
  REQUIRE(g.on_gate_open(SimTime{0}));
  g.on_tx_complete(SimTime{500}, 500us);
  CHECK(g.t_go() == SimTime{500} + 25ms);
  CHECK_FALSE(g.is_open(SimTime{500} + 24ms));
  // A CAM generated 1 ms after the DP3 frame left must wait for t_go.
  CHECK(g.is_open(SimTime{500} + 25ms));
}

TEST_CASE("saturated gate at delta_max sends 40 frames per second") {
  Gatekeeper g(2);
  g.set_limit(GateLimit::share(0.03));
  SimTime t{0};
  int sent = 0;
  while (t < 1s) {
    if (g.total_depth() == 0) g.enqueue(frame(DataProfile::DP3));
    if (g.is_open(t)) {
      REQUIRE(g.on_gate_open(t));
      ++sent;
      g.on_tx_complete(t + 500us, 500us);
      t = g.t_go();
    } else {
      t = g.t_go();
    }
  }
  CHECK(sent == 40);
}

TEST_CASE("zero allowance closes the gate until a positive one arrives") {
  Gatekeeper g;
  g.set_limit(GateLimit::share(0.01));
  g.enqueue(frame(DataProfile::DP2));
  REQUIRE(g.on_gate_open(SimTime{0}));
  g.set_limit(GateLimit::share(0.0));
  g.on_tx_complete(SimTime{643}, 643us);
  CHECK(g.closed());
  CHECK_FALSE(g.is_open(SimTime{10000000}));
  g.set_limit(GateLimit::share(0.01));
  CHECK(g.t_go() == SimTime{643} + Duration{64300});
}

TEST_CASE("facilities feedback") {
  Gatekeeper g;
  CHECK(g.facilities_feedback(643us) == Duration::zero());
  g.set_limit(GateLimit::share(0.03));
  CHECK(g.facilities_feedback(500us) == 25ms);
  g.set_limit(GateLimit::share(0.0006));
  CHECK(g.facilities_feedback(500us) == Duration{833333});
  g.set_limit(GateLimit::rate_cap(2));
  CHECK(g.facilities_feedback(500us) == 500ms);
}

// Randomized frames against a reference model of four FIFOs and the t_go rule.
TEST_CASE("property: gatekeeper priority, rate bound and clamps over 10k frames") {
  RngStream rng(20240501, "gatekeeper-property");
  Gatekeeper g(3);
  std::array<std::deque<std::uint64_t>, kNumProfiles> model;
  std::array<std::uint64_t, kNumProfiles> model_drops{};

  SimTime now{0};
  SimTime earliest{0};  // oracle of the next allowed start
  double delta = 0.03;
  g.set_limit(GateLimit::share(delta));
  std::int64_t airtime_total = 0;
  std::int64_t first_start = -1, last_end = 0;
  int frames = 0, sent = 0, share_violations = 0, priority_violations = 0, early = 0;

  while (frames < 10000) {
    const auto op = rng.uniform_int(0, 9);
    if (op <= 5) {
      const auto dp = static_cast<DataProfile>(rng.uniform_int(0, 3));
      const std::uint64_t id = static_cast<std::uint64_t>(++frames);
      const auto r = g.enqueue(frame(dp, id));
      auto& q = model[static_cast<std::size_t>(dp)];
      if (q.size() < 3) {
        q.push_back(id);
        CHECK(r == q.size());
      } else {
        ++model_drops[static_cast<std::size_t>(dp)];
        CHECK_FALSE(r);
      }
    } else if (op == 6) {
      // Controller output changes only take effect at the next completion.
      delta = rng.uniform(0.0006, 0.03);
      g.set_limit(GateLimit::share(delta));
    } else {
      now += Duration{rng.uniform_int(0, 60000)};
      if (!g.is_open(now)) continue;
      const auto f = g.on_gate_open(now);
      auto it = std::find_if(model.begin(), model.end(), [](const auto& q) { return !q.empty(); });
      if (it == model.end()) {
        CHECK_FALSE(f);
        continue;
      }
      REQUIRE(f);
      if (f->id != it->front()) ++priority_violations;
      it->pop_front();
      if (now < earliest) ++early;
      const Duration t_on{rng.uniform_int(100, 2000)};
      const SimTime end = now + t_on;
      g.on_tx_complete(end, t_on);
      const Duration wait = g.t_go() - end;
      if (wait < kMinGateWait || wait > kMaxGateWait) ++share_violations;
      CHECK(wait == next_tx_wait(t_on, delta));
      earliest = g.t_go();
      airtime_total += t_on.count();
      if (first_start < 0) first_start = now.count();
      last_end = end.count();
      now = end;
      ++sent;
    }
  }
  for (std::size_t i = 0; i < kNumProfiles; ++i) {
    CHECK(g.depth(static_cast<DataProfile>(i)) == model[i].size());
    CHECK(g.drops(static_cast<DataProfile>(i)) == model_drops[i]);
  }
  CHECK(sent > 1000);
  CHECK(priority_violations == 0);
  CHECK(early == 0);
  CHECK(share_violations == 0);
  // Each transmission is followed by at least t_on/delta_max of silence.
  const double share = static_cast<double>(airtime_total) / static_cast<double>(last_end - first_start);
  CHECK(share <= 0.03 + 1e-9);
}

TEST_CASE("property: saturated share never exceeds delta") {
  RngStream rng(7, "gate-share");
  for (int trial = 0; trial < 50; ++trial) {
    const double delta = rng.uniform(0.0006, 0.03);
    const Duration t_on{rng.uniform_int(200, 1500)};
    Gatekeeper g(2);
    g.set_limit(GateLimit::share(delta));
    SimTime t{0};
    std::int64_t busy = 0;
    while (t < 60s) {
      g.enqueue(frame(DataProfile::DP3));
      REQUIRE(g.on_gate_open(t));
      g.on_tx_complete(t + t_on, t_on);
      busy += t_on.count();
      t = g.t_go();
    }
    const double share = static_cast<double>(busy) / static_cast<double>(t.count());
    const double bound = static_cast<double>(t_on.count()) /
                         static_cast<double>((t_on + next_tx_wait(t_on, delta)).count());
    CHECK(share == doctest::Approx(bound).epsilon(1e-9));
    // The 1 s ceiling on the wait is the only way to exceed delta.
    const double ceiling = static_cast<double>(t_on.count()) / static_cast<double>((t_on + kMaxGateWait).count());
    CHECK(share <= std::max(delta, ceiling) + 1e-9);
  }
}
