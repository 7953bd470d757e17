#include <doctest.h>

#include <random>
#include <set>

#include "acsim/agents/episode.hpp"
#include "acsim/combat/world.hpp"

using namespace acsim;
using namespace acsim::combat;

namespace {

const EntityId kBlue1{1, 1, 1};
const EntityId kRed1{1, 2, 1};

AircraftState level(double north, double east, double altitude, double heading, double speed = 250.0) {
  AircraftState s;
  s.position = {north, east, -altitude};
  s.heading = wrap_two_pi(heading);
  s.speed = speed;
  s.throttle = 0.5;
  return s;
}

// A random in-range joint action for every aircraft that must act.
JointAction scripted(const WorldState& world, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  JointAction joint;
  for (const auto& [id, rec] : world.aircraft) {
    if (!rec.alive || rec.external) continue;
    joint[id] = {{unit(rng), 0.3 * sym(rng), sym(rng)}, (rng() & 3) == 0};
  }
  return joint;
}

ActionCommand cruise_action() { return {{0.5, 0.0, 0.0}, false}; }

JointAction cruise_all(const WorldState& world) {
  JointAction joint;
  for (const auto& [id, rec] : world.aircraft) {
    if (rec.alive && !rec.external) joint[id] = cruise_action();
  }
  return joint;
}

ScenarioConfig close_quarters(int m, int n) {
  ScenarioConfig c;
  c.blue_count = m;
  c.red_count = n;
  c.spawn.blue = {0.0, -2500.0, 800.0, 4500.0, 5500.0};
  c.spawn.red = {0.0, 2500.0, 800.0, 4500.0, 5500.0};
  c.time_limit = 120.0;
  c.human_slots = {0, 0};
  return c;
}

}  // namespace

TEST_SUITE("combat") {

TEST_CASE("reset spawns the roster inside the volumes, trimmed and alive") {
  ScenarioConfig c;
  c.blue_count = 10;
  c.red_count = 10;
  c.seed = 3;
  const WorldState w = reset(c);
  REQUIRE(w.aircraft.size() == 20);
  CHECK(alive_count(w, Team::kBlue) == 10);
  CHECK(alive_count(w, Team::kRed) == 10);
  for (const auto& [id, rec] : w.aircraft) {
    const SpawnVolume& v = rec.team == Team::kBlue ? c.spawn.blue : c.spawn.red;
    CHECK(id.application == (rec.team == Team::kBlue ? 1 : 2));
    CHECK(std::hypot(rec.state.position.x - v.north, rec.state.position.y - v.east) <= v.radius + 1e-9);
    CHECK(rec.state.altitude() >= v.altitude_min);
    CHECK(rec.state.altitude() <= v.altitude_max);
    CHECK(rec.state.speed >= c.spawn.speed_min);
    CHECK(rec.state.speed <= c.spawn.speed_max);
    CHECK(rec.state.bank == 0.0);
    CHECK(rec.state.flight_path_angle == 0.0);
    CHECK(rec.hp == 1.0);
    CHECK(rec.alive);
  }
  CHECK(w.time == 0.0);
  CHECK(w.event_log.empty());
  CHECK_FALSE(w.done);
}

TEST_CASE("reset is a function of the config and seed") {
  ScenarioConfig c;
  c.blue_count = 3;
  c.red_count = 2;
  c.seed = 99;
  CHECK(reset(c) == reset(c));

  std::set<std::vector<double>> layouts;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    c.seed = seed;
    std::vector<double> layout;
    for (const auto& [id, rec] : reset(c).aircraft) {
      layout.insert(layout.end(), {rec.state.position.x, rec.state.position.y, rec.state.position.z});
    }
    layouts.insert(layout);
  }
  CHECK(layouts.size() >= 99);
}

TEST_CASE("facing toward the enemy points each team at the other's center") {
  ScenarioConfig c;
  c.seed = 5;
  const WorldState w = reset(c);
  CHECK(w.aircraft.at(kBlue1).state.heading == doctest::Approx(kPi / 2));
  CHECK(w.aircraft.at(kRed1).state.heading == doctest::Approx(3 * kPi / 2));
}

TEST_CASE("the same seed and action script give identical trajectories and event logs") {
  ScenarioConfig c = close_quarters(2, 2);
  c.seed = 41;
  auto run = [&] {
    WorldState w = reset(c);
    std::mt19937_64 rng(8);
    std::vector<std::map<EntityId, double>> rewards;
    for (int i = 0; i < 200 && !w.done; ++i) rewards.push_back(step(w, scripted(w, rng)).rewards);
    return std::pair(w, rewards);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.first.event_log == b.first.event_log);
  CHECK(a.second == b.second);
}

TEST_CASE("step advances 50 ms in five integration steps") {
  WorldState w = reset(ScenarioConfig{});
  const AircraftState before = w.aircraft.at(kBlue1).state;
  const auto result = step(w, cruise_all(w));
  CHECK(w.time == doctest::Approx(0.05));
  CHECK(w.step_count == 1);
  AircraftState expected = before;
  for (int i = 0; i < 5; ++i) expected = flightdyn::step(expected, cruise_action().control, 0.01);
  CHECK(w.aircraft.at(kBlue1).state == expected);
  CHECK_FALSE(result.done);
  CHECK(result.rewards.size() == 2);
  CHECK(w.event_log.empty());
}

TEST_CASE("step rejects malformed joint actions") {
  WorldState w = reset(ScenarioConfig{});
  JointAction joint = cruise_all(w);

  JointAction missing = joint;
  missing.erase(kRed1);
  CHECK_THROWS_AS(step(w, missing), ContractViolation);

  JointAction unknown = joint;
  unknown[{1, 2, 9}] = cruise_action();
  CHECK_THROWS_AS(step(w, unknown), ContractViolation);

  JointAction out_of_range = joint;
  out_of_range[kBlue1].control.throttle = 1.2;
  CHECK_THROWS_AS(step(w, out_of_range), ContractViolation);

  WorldState dead = w;
  dead.aircraft.at(kRed1).alive = false;
  CHECK_THROWS_AS(step(dead, joint), ContractViolation);

  WorldState external = w;
  set_external(external, kRed1, true);
  CHECK_THROWS_AS(step(external, joint), ContractViolation);
  JointAction without_external = joint;
  without_external.erase(kRed1);
  CHECK_NOTHROW(step(external, without_external));

  CHECK(w.step_count == 0);
}

TEST_CASE("a zero time limit ends the episode at reset as a draw") {
  ScenarioConfig c;
  c.time_limit = 0.0;
  WorldState w = reset(c);
  CHECK(w.done);
  CHECK(w.winner == Winner::kDraw);
  REQUIRE(w.event_log.size() == 1);
  CHECK(w.event_log[0].kind == EventKind::kTimeout);
  CHECK_THROWS_AS(step(w, cruise_all(w)), ContractViolation);
}

TEST_CASE("the time limit ends the episode with a timeout event") {
  ScenarioConfig c;
  c.time_limit = 1.0;
  WorldState w = reset(c);
  int steps = 0;
  while (!w.done) {
    step(w, cruise_all(w));
    ++steps;
  }
  CHECK(steps == 20);
  CHECK(w.winner == Winner::kDraw);
  REQUIRE_FALSE(w.event_log.empty());
  CHECK(w.event_log.back().kind == EventKind::kTimeout);
  CHECK(w.event_log.back().time == doctest::Approx(1.0));
}

TEST_CASE("wez_check is inclusive at 1500 m and 10 degrees") {
  const AircraftState shooter = level(0, 0, 5000, 0);
  auto at = [&](double r, double off_deg) {
    const double a = deg_to_rad(off_deg);
    return level(r * std::cos(a), r * std::sin(a), 5000, 0);
  };
  CHECK(wez_check(shooter, at(500, 0)));
  CHECK_FALSE(wez_check(shooter, at(2000, 0)));
  CHECK(wez_check(shooter, at(1000, 10.0)));
  CHECK(wez_check(shooter, at(1000, -10.0)));
  CHECK_FALSE(wez_check(shooter, at(1000, 10.01)));
  CHECK(wez_check(shooter, at(1500, 0)));
  CHECK_FALSE(wez_check(shooter, at(1500.001, 0)));
  CHECK_FALSE(wez_check(shooter, at(800, 180)));
}

TEST_CASE("antenna train and aspect angles for known geometry") {
  const AircraftState viewer = level(0, 0, 5000, 0);
  // Target 1 km ahead flying away: dead astern, ATA 0, aspect 0.
  CHECK(antenna_train_angle(viewer, level(1000, 0, 5000, 0)) == doctest::Approx(0.0));
  CHECK(aspect_angle(viewer, level(1000, 0, 5000, 0)) == doctest::Approx(0.0));
  // Head on: aspect pi.
  CHECK(aspect_angle(viewer, level(1000, 0, 5000, kPi)) == doctest::Approx(kPi));
  // Target due east, flying north: ATA 90, aspect 90.
  CHECK(antenna_train_angle(viewer, level(0, 1000, 5000, 0)) == doctest::Approx(kPi / 2));
  CHECK(aspect_angle(viewer, level(0, 1000, 5000, 0)) == doctest::Approx(kPi / 2));
  // Target behind: ATA pi.
  CHECK(antenna_train_angle(viewer, level(-1000, 0, 5000, 0)) == doctest::Approx(kPi));
  CHECK(range(viewer, level(300, 400, 5000, 0)) == doctest::Approx(500.0));
}

TEST_CASE("a certain hit kills with fire, hit and kill events at the same time") {
  ScenarioConfig c;
  c.rules.hit_probability = 1.0;
  WorldState w = reset(c);
  w.aircraft.at(kBlue1).state = level(0, 0, 5000, 0);
  w.aircraft.at(kRed1).state = level(800, 0, 5000, 0);
  JointAction joint = cruise_all(w);
  joint[kBlue1].fire = true;
  const auto result = step(w, joint);
  CHECK(result.done);
  CHECK(w.winner == Winner::kBlue);
  REQUIRE(w.event_log.size() == 3);
  CHECK(w.event_log[0] == Event{0.0, EventKind::kFire, kBlue1, kRed1});
  CHECK(w.event_log[1] == Event{0.0, EventKind::kHit, kBlue1, kRed1});
  CHECK(w.event_log[2] == Event{0.0, EventKind::kKill, kBlue1, kRed1});
  CHECK(w.aircraft.at(kRed1).hp == 0.0);
  CHECK_FALSE(w.aircraft.at(kRed1).alive);
  CHECK(result.rewards.at(kBlue1) == doctest::Approx(1.0 - 0.001));
  CHECK(result.rewards.at(kRed1) == doctest::Approx(-1.0 + -0.001));
}

TEST_CASE("dead aircraft keep their state and the gun honours its cooldown") {
  ScenarioConfig c;
  c.blue_count = 2;
  c.rules.hit_probability = 0.0;
  c.human_slots = {0, 0};
  WorldState w = reset(c);
  w.aircraft.at(kBlue1).state = level(0, 0, 5000, 0);
  w.aircraft.at(kRed1).state = level(800, 0, 5000, 0);
  w.aircraft.at({1, 1, 2}).alive = false;
  const AircraftState frozen = w.aircraft.at({1, 1, 2}).state;
  int fires = 0;
  for (int i = 0; i < 30; ++i) {
    JointAction joint = cruise_all(w);
    joint[kBlue1].fire = true;
    step(w, joint);
  }
  for (const auto& e : w.event_log) fires += e.kind == EventKind::kFire;
  CHECK(fires == 2);  // t = 0 and t = 1.0 within 1.5 s
  CHECK(w.aircraft.at({1, 1, 2}).state == frozen);
}

TEST_CASE("mutual kills on one step are a draw") {
  ScenarioConfig c;
  c.rules.hit_probability = 1.0;
  WorldState w = reset(c);
  w.aircraft.at(kBlue1).state = level(0, 0, 5000, 0);
  w.aircraft.at(kRed1).state = level(800, 0, 5000, kPi);
  JointAction joint = cruise_all(w);
  joint[kBlue1].fire = true;
  joint[kRed1].fire = true;
  CHECK(step(w, joint).done);
  CHECK(w.winner == Winner::kDraw);
  CHECK(alive_count(w, Team::kBlue) == 0);
  CHECK(alive_count(w, Team::kRed) == 0);
}

TEST_CASE("flying into the ground is a crash") {
  WorldState w = reset(ScenarioConfig{});
  w.aircraft.at(kBlue1).state = level(0, 0, 5.0, 0);
  w.aircraft.at(kBlue1).state.flight_path_angle = -0.5;
  const auto result = step(w, cruise_all(w));
  CHECK_FALSE(w.aircraft.at(kBlue1).alive);
  CHECK(w.event_log.front().kind == EventKind::kCrash);
  CHECK(w.event_log.front().target == kBlue1);
  CHECK(result.done);
  CHECK(w.winner == Winner::kRed);
}

TEST_CASE("rewards follow the stated terms per policy") {
  namespace rc = reward_constants;
  RewardTerms kill;
  kill.kills = 1;
  CHECK(reward(PolicyKind::kAttack, kill) == doctest::Approx(1.0 - 0.001));
  RewardTerms died;
  died.died = true;
  CHECK(reward(PolicyKind::kAttack, died) == doctest::Approx(-1.0 - 0.001));
  CHECK(reward(PolicyKind::kDefend, died) == doctest::Approx(-1.0));
  CHECK(reward(PolicyKind::kEngage, died) == doctest::Approx(-1.0));

  RewardTerms quiet;
  quiet.nearest_enemy_range = 8000.0;
  CHECK(reward(PolicyKind::kDefend, quiet) == doctest::Approx(0.0005));
  CHECK(reward(PolicyKind::kEngage, quiet) == 0.0);
  RewardTerms escaped = quiet;
  escaped.escaped_threat = true;
  CHECK(reward(PolicyKind::kDefend, escaped) == doctest::Approx(0.3005));

  RewardTerms behind;
  behind.nearest_enemy_range = 2000.0;
  behind.nearest_enemy_ata = 0.0;
  CHECK(reward(PolicyKind::kEngage, behind) == doctest::Approx(0.5 * (1.0 - std::sqrt(3.0) / 2.0)));
  CHECK(reward(PolicyKind::kEngage, behind) == doctest::Approx(0.06699).epsilon(1e-4));
  behind.nearest_enemy_ata = deg_to_rad(45.0);
  CHECK(reward(PolicyKind::kEngage, behind) == 0.0);
  behind.nearest_enemy_ata = 0.0;
  behind.rear_quarter_lock = true;
  CHECK(reward(PolicyKind::kEngage, behind) == doctest::Approx(1.06699).epsilon(1e-4));
  behind.nearest_enemy_range = 3500.0;
  CHECK(reward(PolicyKind::kEngage, behind) == doctest::Approx(rc::kEngageLock));
}

TEST_CASE("a rear-quarter lock held for two seconds pays once") {
  WorldState w = reset(ScenarioConfig{});
  w.aircraft.at(kBlue1).state = level(0, 0, 5000, 0, 250.0);
  w.aircraft.at(kBlue1).active_policy = PolicyKind::kEngage;
  w.aircraft.at(kRed1).state = level(2000, 0, 5000, 0, 250.0);
  const ControlInput hold = flightdyn::trim(250.0, 5000.0);
  int lock_steps = 0;
  for (int i = 0; i < 80; ++i) {
    JointAction joint;
    joint[kBlue1] = {hold, false};
    joint[kRed1] = {hold, false};
    const double r = step(w, joint).rewards.at(kBlue1);
    if (r > 0.5) {
      ++lock_steps;
      CHECK(i == 39);
    }
  }
  CHECK(lock_steps == 1);
}

TEST_CASE("discounted return") {
  const std::vector<double> ones{1, 1, 1};
  CHECK(discounted_return(ones, 0.99) == doctest::Approx(2.9701));
  CHECK(discounted_return({}, 0.5) == 0.0);
  const std::vector<double> five{5};
  CHECK(discounted_return(five, 0.0) == 5.0);
  CHECK(discounted_return(five, 0.9) == 5.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r(300);
  for (auto& x : r) x = u(rng);
  double manual = 0.0;
  for (std::size_t t = r.size(); t-- > 0;) manual = r[t] + 0.95 * manual;
  CHECK(discounted_return(r, 0.95) == doctest::Approx(manual).epsilon(1e-12));

  CHECK_THROWS_AS(discounted_return(ones, 1.0), ContractViolation);
  CHECK_THROWS_AS(discounted_return(ones, -0.1), ContractViolation);
}

TEST_CASE("observe measures the enemy due north at zero bearing") {
  WorldState w = reset(ScenarioConfig{});
  w.aircraft.at(kBlue1).state = level(0, 0, 5000, 0);
  w.aircraft.at(kRed1).state = level(1000, 0, 5600, kPi);
  const Observation obs = observe(w, kBlue1);
  CHECK(obs.enemy_mask[0] == 1);
  CHECK(obs.enemies[0].range == doctest::Approx(std::hypot(1000.0, 600.0)));
  CHECK(obs.enemies[0].bearing == doctest::Approx(0.0));
  CHECK(obs.enemies[0].altitude_delta == doctest::Approx(600.0));
  CHECK(obs.enemies[0].closure == doctest::Approx(500.0 * 1000.0 / std::hypot(1000.0, 600.0)));
  CHECK(obs.enemies[0].aspect_angle == doctest::Approx(kPi - std::atan2(600.0, 1000.0)));
  CHECK(obs.own.altitude == 5000.0);
  for (int i = 1; i < kEnemySlots; ++i) {
    CHECK(obs.enemy_mask[i] == 0);
    CHECK(obs.enemies[i] == RelativeBlock{});
  }
  for (int i = 0; i < kAllySlots; ++i) CHECK(obs.ally_mask[i] == 0);
  CHECK(obs.flatten().size() == Observation::kFlatSize);
  CHECK_THROWS_AS(observe(w, {1, 2, 7}), ContractViolation);
}

TEST_CASE("dead aircraft are zeroed and masked in observations") {
  ScenarioConfig c;
  c.red_count = 3;
  WorldState w = reset(c);
  w.aircraft.at({1, 2, 2}).alive = false;
  const Observation obs = observe(w, kBlue1);
  CHECK(obs.enemy_mask[0] == 1);
  CHECK(obs.enemy_mask[1] == 0);
  CHECK(obs.enemies[1] == RelativeBlock{});
  CHECK(obs.enemy_mask[2] == 1);
  CHECK(obs.enemies[2].alive == 1.0);
}

TEST_CASE("external aircraft move by dead reckoning and accept mirrored state") {
  WorldState w = reset(ScenarioConfig{});
  CHECK_THROWS_AS(apply_external_state(w, kRed1, level(0, 0, 5000, 0), true), ContractViolation);
  CHECK_THROWS_AS(set_external(w, {1, 2, 5}, true), ContractViolation);
  set_external(w, kRed1, true);
  apply_external_state(w, kRed1, level(100, 200, 5000, kPi / 2, 200.0), true);
  JointAction joint;
  joint[kBlue1] = cruise_action();
  step(w, joint);
  const Vec3 p = w.aircraft.at(kRed1).state.position;
  CHECK(p.x == doctest::Approx(100.0));
  CHECK(p.y == doctest::Approx(210.0));
  apply_external_state(w, kRed1, w.aircraft.at(kRed1).state, false);
  CHECK_FALSE(w.aircraft.at(kRed1).alive);
  CHECK(w.aircraft.at(kRed1).hp == 0.0);
  apply_external_state(w, kRed1, w.aircraft.at(kRed1).state, true);
  CHECK_FALSE(w.aircraft.at(kRed1).alive);
}

TEST_CASE("validate rejects broken configs") {
  auto rejects = [](auto mutate) {
    ScenarioConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate(c), ConfigError);
  };
  CHECK_NOTHROW(validate(ScenarioConfig{}));
  rejects([](ScenarioConfig& c) { c.blue_count = 0; });
  rejects([](ScenarioConfig& c) { c.red_count = 11; });
  rejects([](ScenarioConfig& c) { c.time_limit = -1.0; });
  rejects([](ScenarioConfig& c) { c.time_limit = std::nan(""); });
  rejects([](ScenarioConfig& c) { c.spawn.speed_max = 900.0; });
  rejects([](ScenarioConfig& c) { c.spawn.red = c.spawn.blue; });
  rejects([](ScenarioConfig& c) { c.spawn.blue.altitude_min = 7000.0; });
  rejects([](ScenarioConfig& c) { c.human_slots.blue = 2; });
  rejects([](ScenarioConfig& c) { c.rules.hit_probability = 1.5; });
  rejects([](ScenarioConfig& c) { c.curriculum_stage = -1; });
  ScenarioConfig thin;
  thin.spawn.blue.altitude_min = thin.spawn.blue.altitude_max = 30000.0;
  thin.spawn.speed_min = thin.spawn.speed_max = 150.0;
  CHECK_THROWS_AS(reset(thin), ConfigError);
}

TEST_CASE("episode invariants hold under scripted combat") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    ScenarioConfig c = close_quarters(2 + static_cast<int>(seed % 3), 2);
    c.seed = seed;
    c.time_limit = 60.0;
    WorldState w = reset(c);
    agents::FixedPolicyController blue(PolicyKind::kAttack), red(PolicyKind::kAttack);
    blue.begin_episode(w, Team::kBlue, seed);
    red.begin_episode(w, Team::kRed, seed + 1);
    const std::size_t roster = w.aircraft.size();
    int alive_before = alive_count(w, Team::kBlue) + alive_count(w, Team::kRed);
    double t_before = w.time;
    std::size_t events_before = 0;
    int steps = 0;
    while (!w.done) {
      const JointAction joint = agents::decide_joint(w, blue, red);
      const std::vector<Event> log_before = w.event_log;
      const auto result = step(w, joint);
      ++steps;
      REQUIRE(w.aircraft.size() == roster);
      REQUIRE(w.time > t_before);
      t_before = w.time;
      const int alive_now = alive_count(w, Team::kBlue) + alive_count(w, Team::kRed);
      REQUIRE(alive_now <= alive_before);
      alive_before = alive_now;
      REQUIRE(w.event_log.size() >= events_before);
      REQUIRE(std::equal(log_before.begin(), log_before.end(), w.event_log.begin()));
      events_before = w.event_log.size();
      for (const auto& [id, r] : result.rewards) REQUIRE(std::abs(r) <= 2.0);
      for (const auto& [id, rec] : w.aircraft) {
        const Observation obs = observe(w, id);
        int slot = 0;
        for (const auto& [other_id, other] : w.aircraft) {
          if (other.team == rec.team) continue;
          if (other.alive) {
            REQUIRE(std::abs(obs.enemies[slot].range - range(rec.state, other.state)) < 1e-9);
          }
          ++slot;
        }
      }
      REQUIRE(steps <= 1200);
    }
    // Kill accounting: each kill follows a hit on the same pair at the same
    // time, and kills by a team equal the other team's non-crash deaths.
    std::map<Team, int> kills_by, shot_down;
    for (std::size_t i = 0; i < w.event_log.size(); ++i) {
      const Event& e = w.event_log[i];
      if (e.kind != EventKind::kKill) continue;
      REQUIRE(i > 0);
      const Event& prev = w.event_log[i - 1];
      CHECK(prev.kind == EventKind::kHit);
      CHECK(prev.shooter == e.shooter);
      CHECK(prev.target == e.target);
      CHECK(prev.time == e.time);
      ++kills_by[w.aircraft.at(*e.shooter).team];
    }
    std::set<EntityId> crashed;
    for (const auto& e : w.event_log) {
      if (e.kind == EventKind::kCrash) crashed.insert(*e.target);
    }
    for (const auto& [id, rec] : w.aircraft) {
      if (!rec.alive && !crashed.contains(id)) ++shot_down[rec.team];
    }
    CHECK(kills_by[Team::kBlue] == shot_down[Team::kRed]);
    CHECK(kills_by[Team::kRed] == shot_down[Team::kBlue]);
  }
}

}  // TEST_SUITE
