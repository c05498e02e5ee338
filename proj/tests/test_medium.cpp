#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dcc/medium.hpp"
#include "dcc/rng.hpp"

using namespace dcc;
using namespace std::chrono_literals;

namespace {

// Static nodes on a plane with brute-force range queries.
class FixedTopology : public Topology {
 public:
  explicit FixedTopology(std::vector<Position> p) : pos_(std::move(p)) {}
  std::size_t size() const override { return pos_.size(); }
  Position position(std::uint32_t id) const override { return pos_[id]; }
  double distance(const Position& a, const Position& b) const override {
    return std::hypot(a.x - b.x, a.y - b.y);
  }
  void within(const Position& p, double range, std::vector<std::uint32_t>& out) const override {
    for (std::uint32_t i = 0; i < pos_.size(); ++i)
      if (distance(p, pos_[i]) <= range) out.push_back(i);
  }

 private:
  std::vector<Position> pos_;
};

Frame make_frame(VehicleId src, std::uint64_t id) {
  Frame f;
  f.id = id;
  f.source = src;
  f.profile = DataProfile::DP2;
  f.payload_bytes = 400;
  return f;
}

struct Outcome {
  std::vector<Transmission> done;
};

}  // namespace

TEST_CASE("airtime of the default CAM") {
  RadioParams p;
  CHECK(airtime(400, p) == Duration{643});
  CHECK(to_seconds(airtime(400, p)) * 1e6 == doctest::Approx(643.3).epsilon(0.001));
  CHECK_THROWS_AS(airtime(0, p), InputError);
  CHECK(p.aifs(AccessCategory::Voice) == Duration{32 + 2 * 13});
  CHECK(p.aifs(AccessCategory::Background) == Duration{32 + 9 * 13});
}

TEST_CASE("cbr from intervals") {
  const std::vector<std::pair<SimTime, SimTime>> one{{SimTime{1000}, SimTime{1643}}};
  CHECK(cbr_from_intervals(one, SimTime{0}, 100ms) == doctest::Approx(0.00643));
  const std::vector<std::pair<SimTime, SimTime>> overlap{
      {SimTime{0}, SimTime{100}}, {SimTime{50}, SimTime{150}}, {SimTime{300}, SimTime{400}}};
  CHECK(cbr_from_intervals(overlap, SimTime{0}, Duration{1000}) == doctest::Approx(0.25));
  // clipped at both window edges
  const std::vector<std::pair<SimTime, SimTime>> edges{{SimTime{-50}, SimTime{50}},
                                                       {SimTime{950}, SimTime{1100}}};
  CHECK(cbr_from_intervals(edges, SimTime{0}, Duration{1000}) == doctest::Approx(0.1));
}

TEST_CASE("radio parameter validation") {
  RadioParams p;
  p.rx_range_m = 800;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  RadioParams q;
  q.aifsn[0] = 0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("a lone frame is delivered within rx range and counted in CBR") {
  FixedTopology topo({{0, 0}, {300, 0}, {600, 0}, {1000, 0}});
  Engine engine;
  Medium m(engine, topo, RadioParams{}, 1);
  std::vector<Transmission> done;
  m.on_tx_end([&](const Transmission& t) { done.push_back(t); });
  m.submit(0, make_frame(0, 1), AccessCategory::BestEffort);
  CHECK(m.holds_frame(0));
  engine.run_until(100ms);
  REQUIRE(done.size() == 1);
  const Transmission& t = done[0];
  std::map<VehicleId, bool> got;
  for (const Receiver& r : t.receivers) got[r.node] = r.delivered;
  CHECK(got.count(0) == 1);
  CHECK_FALSE(got[0]);
  CHECK(got[1]);           // 300 m
  CHECK_FALSE(got[2]);     // 600 m: sensed, not decoded
  CHECK(got.count(3) == 0);  // beyond sense range
  CHECK_FALSE(m.holds_frame(0));

  std::vector<double> cbr(4);
  m.close_cbr_windows(100ms, cbr);
  CHECK(cbr[0] == doctest::Approx(0.00643));
  CHECK(cbr[2] == doctest::Approx(0.00643));
  CHECK(cbr[3] == 0.0);
}

TEST_CASE("hidden node collides at a receiver between two senders") {
  // A at 0 and B at 1000 cannot hear each other; C at 500 hears both.
  FixedTopology topo({{0, 0}, {1000, 0}, {500, 0}});
  Engine engine;
  RadioParams p;
  p.cw_min = {0, 0, 0, 0};
  Medium m(engine, topo, p, 1);
  std::vector<Transmission> done;
  m.on_tx_end([&](const Transmission& t) { done.push_back(t); });
  m.submit(0, make_frame(0, 1), AccessCategory::BestEffort);
  m.submit(1, make_frame(1, 2), AccessCategory::BestEffort);
  engine.run_until(10ms);
  REQUIRE(done.size() == 2);
  for (const Transmission& t : done) {
    for (const Receiver& r : t.receivers)
      if (r.node == 2) CHECK_FALSE(r.delivered);
  }
}

TEST_CASE("carrier sense defers a second sender") {
  FixedTopology topo({{0, 0}, {100, 0}, {200, 0}});
  Engine engine;
  Medium m(engine, topo, RadioParams{}, 3);
  std::vector<Transmission> done;
  m.on_tx_end([&](const Transmission& t) { done.push_back(t); });
  m.submit(0, make_frame(0, 1), AccessCategory::Voice);
  engine.run_until(SimTime{200});  // 0 is on air by now (AIFS 58 us + <= 3 slots)
  m.submit(1, make_frame(1, 2), AccessCategory::Voice);
  engine.run_until(10ms);
  REQUIRE(done.size() == 2);
  CHECK(done[1].start >= done[0].end());
  for (const Transmission& t : done)
    for (const Receiver& r : t.receivers)
      if (r.node != t.source) CHECK(r.delivered);
}

TEST_CASE("submitting to a busy MAC is an error") {
  FixedTopology topo({{0, 0}});
  Engine engine;
  Medium m(engine, topo, RadioParams{}, 1);
  m.submit(0, make_frame(0, 1), AccessCategory::BestEffort);
  CHECK_THROWS_AS(m.submit(0, make_frame(0, 2), AccessCategory::BestEffort), InputError);
}

// Randomized placements and traffic: the incremental tracker must agree with
// the ledger-based reference for every (transmission, receiver) pair and for
// every node's CBR.
TEST_CASE("property: medium reception and CBR match the reference") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    RngStream rng(seed, "medium-property");
    std::vector<Position> pos;
    const int n = 40;
    for (int i = 0; i < n; ++i) pos.push_back({rng.uniform(0, 3000), rng.uniform(-20, 20)});
    FixedTopology topo(pos);
    Engine engine;
    RadioParams params;
    Medium m(engine, topo, params, seed);
    m.record_ledger(true);
    std::vector<Transmission> done;
    m.on_tx_end([&](const Transmission& t) { done.push_back(t); });

    // Each node offers a frame at random instants; busy nodes skip.
    std::uint64_t id = 0;
    for (int k = 0; k < 600; ++k) {
      const SimTime at{rng.uniform_int(0, 999000)};
      const auto src = static_cast<VehicleId>(rng.uniform_int(0, n - 1));
      const auto ac = static_cast<AccessCategory>(rng.uniform_int(0, 3));
      engine.schedule(at, EventKind::GateOpen, [&, src, ac, fid = ++id] {
        if (!m.holds_frame(src)) m.submit(src, make_frame(src, fid), ac);
      });
    }
    std::vector<double> cbr(n);
    std::vector<std::vector<double>> windows;
    for (int w = 1; w <= 11; ++w) {
      engine.run_until(SimTime{w * 100000});
      m.close_cbr_windows(SimTime{w * 100000}, cbr);
      windows.push_back(cbr);
    }
    REQUIRE(m.tx_started() == m.tx_ended());
    const auto& ledger = m.ledger();
    REQUIRE(ledger.size() == done.size());

    int mismatches = 0;
    for (const Transmission& t : done) {
      const LedgerEntry* entry = nullptr;
      for (const LedgerEntry& e : ledger)
        if (e.id == t.id) entry = &e;
      REQUIRE(entry != nullptr);
      for (const Receiver& r : t.receivers) {
        if (r.node == t.source) continue;
        const bool ref = resolve_reception(*entry, r.node, pos[r.node], ledger, params, topo);
        if (ref != r.delivered) ++mismatches;
      }
      // Every node in rx range is accounted for in the receiver list.
      for (VehicleId v = 0; v < static_cast<VehicleId>(n); ++v) {
        const bool listed = std::any_of(t.receivers.begin(), t.receivers.end(),
                                        [&](const Receiver& r) { return r.node == v; });
        CHECK(listed == (topo.distance(t.position, pos[v]) <= params.sense_range_m));
      }
    }
    CHECK(mismatches == 0);

    for (int v = 0; v < n; ++v) {
      std::vector<std::pair<SimTime, SimTime>> iv;
      for (const LedgerEntry& e : ledger)
        if (topo.distance(e.position, pos[static_cast<std::size_t>(v)]) <= params.sense_range_m)
          iv.emplace_back(e.start, e.start + e.duration);
      for (std::size_t w = 0; w < windows.size(); ++w) {
        const double ref = cbr_from_intervals(iv, SimTime{static_cast<std::int64_t>(w) * 100000}, 100ms);
        CHECK(windows[w][static_cast<std::size_t>(v)] == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: reception is monotone in interference and distance") {
  RngStream rng(42, "monotone");
  RadioParams params;
  FixedTopology topo([&] {
    std::vector<Position> p;
    for (int i = 0; i < 30; ++i) p.push_back({rng.uniform(0, 2000), 0});
    return p;
  }());
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<LedgerEntry> ledger;
    for (std::uint64_t k = 0; k < 8; ++k) {
      const auto src = static_cast<VehicleId>(rng.uniform_int(0, 29));
      ledger.push_back({k, src, topo.position(src), SimTime{rng.uniform_int(0, 5000)}, Duration{643}});
    }
    const LedgerEntry& tx = ledger[0];
    for (VehicleId r = 0; r < 30; ++r) {
      const bool with_all = resolve_reception(tx, r, topo.position(r), ledger, params, topo);
      // Removing interferers never turns a delivery into a loss.
      for (std::size_t drop = 1; drop < ledger.size(); ++drop) {
        std::vector<LedgerEntry> fewer = ledger;
        fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
        const bool with_fewer = resolve_reception(tx, r, topo.position(r), fewer, params, topo);
        if (with_all) CHECK(with_fewer);
      }
      // Alone on the channel, delivery depends only on distance.
      const std::vector<LedgerEntry> alone{tx};
      const bool clean = resolve_reception(tx, r, topo.position(r), alone, params, topo);
      const double d = topo.distance(tx.position, topo.position(r));
      CHECK(clean == (r != tx.source && d <= params.rx_range_m));
    }
  }
}

TEST_CASE("probabilistic reception falls off with distance") {
  // Many lone transmissions to receivers at increasing distance.
  std::vector<Position> pos{{0, 0}};
  for (int d = 100; d <= 700; d += 100) pos.push_back({static_cast<double>(d), 0});
  FixedTopology topo(pos);
  Engine engine;
  RadioParams p;
  p.model = ReceptionModel::Probabilistic;
  Medium m(engine, topo, p, 5);
  std::vector<int> ok(pos.size(), 0);
  m.on_tx_end([&](const Transmission& t) {
    for (const Receiver& r : t.receivers)
      if (r.delivered) ++ok[r.node];
  });
  for (int k = 0; k < 2000; ++k) {
    engine.schedule(SimTime{k * 2000}, EventKind::GateOpen,
                    [&, k] { m.submit(0, make_frame(0, static_cast<std::uint64_t>(k)), AccessCategory::Voice); });
  }
  engine.run_until(5s);
  for (std::size_t i = 2; i < pos.size(); ++i) CHECK(ok[i] <= ok[i - 1]);
  CHECK(ok[1] > 1900);
  CHECK(ok[7] < 100);
}
