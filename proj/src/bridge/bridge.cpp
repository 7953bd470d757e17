#include "acsim/bridge/bridge.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "acsim/bounded_queue.hpp"

namespace acsim::bridge {

using combat::ConfigError;

bool VrfFilter::matches(std::uint8_t exercise, const EntityId& id) const {
  return exercise == exercise_id && (!site || *site == id.site) &&
         (!application || *application == id.application);
}

bool VrfFilter::matches(const dis::Pdu& pdu) const {
  return std::visit([&](const auto& p) { return matches(p.header.exercise_id, p.entity_id); }, pdu);
}

std::string_view to_string(BridgeMode mode) { return mode == BridgeMode::kState ? "state" : "action"; }

std::optional<BridgeMode> parse_mode(std::string_view text) {
  if (text == "state") return BridgeMode::kState;
  if (text == "action") return BridgeMode::kAction;
  return std::nullopt;
}

Roster default_roster(const combat::ScenarioConfig& scenario) {
  Roster roster;
  const auto add = [&](Team team, int count, int humans) {
    for (int i = 0; i < count; ++i) {
      roster[combat::make_entity_id(team, i)] = i < humans ? ControlledBy::kExternal : ControlledBy::kAgent;
    }
  };
  add(Team::kBlue, scenario.blue_count, scenario.human_slots.blue);
  add(Team::kRed, scenario.red_count, scenario.human_slots.red);
  return roster;
}

void validate(const BridgeConfig& c) {
  if (!(c.send_rate >= 1.0 && c.send_rate <= 100.0)) {
    throw ConfigError("send_rate must lie in [1, 100] Hz");
  }
  if (c.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  const bool loopback = c.destination.host == "127.0.0.1" || c.destination.host == "localhost";
  if (loopback && c.listen.port != 0 && c.listen.port == c.destination.port) {
    throw ConfigError("listen and destination share port " + std::to_string(c.listen.port));
  }
}

BridgeCounters BridgeStats::snapshot() const {
  BridgeCounters c;
  c.received = received.load();
  c.accepted = accepted.load();
  c.dropped = dropped.load();
  c.malformed = malformed.load();
  c.unsupported = unsupported.load();
  c.filtered = filtered.load();
  c.ignored = ignored.load();
  c.sent = sent.load();
  c.send_failed = send_failed.load();
  c.last_receive = last_receive.load();
  return c;
}

std::optional<dis::Pdu> screen_datagram(std::span<const std::uint8_t> bytes, const VrfFilter& filter,
                                        BridgeStats& stats) {
  ++stats.received;
  stats.last_receive = std::chrono::duration<double>(
                           std::chrono::steady_clock::now().time_since_epoch())
                           .count();
  dis::DecodedPdu decoded;
  try {
    decoded = dis::decode(bytes);
  } catch (const dis::MalformedPacket&) {
    ++stats.malformed;
    return std::nullopt;
  }
  std::optional<dis::Pdu> pdu;
  if (const auto* es = std::get_if<dis::EntityStatePdu>(&decoded)) {
    pdu = *es;
  } else if (const auto* action = std::get_if<dis::ActionDataPdu>(&decoded)) {
    pdu = *action;
  } else {
    ++stats.unsupported;
    return std::nullopt;
  }
  if (!filter.matches(*pdu)) {
    ++stats.filtered;
    return std::nullopt;
  }
  return pdu;
}

// ---------------------------------------------------------------------------

namespace {

std::array<float, 3> to_float3(const Vec3& v) {
  return {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
}

Vec3 to_vec(const std::array<float, 3>& v) { return {v[0], v[1], v[2]}; }

std::string callsign(const EntityId& id, Team team) {
  return std::string(team == Team::kBlue ? "BLUE" : "RED") + std::to_string(id.entity);
}

}  // namespace

dis::EntityStatePdu to_entity_state(const EntityId& id, const flightdyn::AircraftState& state,
                                    Team team, bool alive, const dis::LocalFrame& frame,
                                    std::uint8_t exercise_id, std::uint32_t timestamp) {
  dis::EntityStatePdu pdu;
  pdu.header.exercise_id = exercise_id;
  pdu.header.timestamp = timestamp;
  pdu.entity_id = id;
  pdu.force_id = static_cast<std::uint8_t>(team == Team::kBlue ? dis::ForceId::kFriendly
                                                               : dis::ForceId::kOpposing);
  pdu.entity_type = dis::kFighterType;
  const Vec3 location = frame.ned_to_ecef(state.position);
  pdu.location = {location.x, location.y, location.z};
  pdu.linear_velocity = to_float3(frame.ned_vector_to_ecef(state.velocity()));
  const dis::EulerAngles o =
      frame.local_to_dis({state.heading, state.flight_path_angle, state.bank});
  pdu.orientation = {static_cast<float>(o.psi), static_cast<float>(o.theta),
                     static_cast<float>(o.phi)};
  pdu.appearance = alive ? 0 : dis::kAppearanceDestroyed;
  pdu.dead_reckoning_algorithm = dis::kDrmFpw;
  pdu.marking = callsign(id, team);
  return pdu;
}

MirroredState from_entity_state(const dis::EntityStatePdu& pdu, const dis::LocalFrame& frame) {
  MirroredState m;
  auto& s = m.state;
  s.position = frame.ecef_to_ned({pdu.location[0], pdu.location[1], pdu.location[2]});
  const Vec3 v = frame.ecef_vector_to_ned(to_vec(pdu.linear_velocity));
  s.speed = v.norm();
  s.heading = wrap_two_pi(std::atan2(v.y, v.x));
  s.flight_path_angle = std::atan2(-v.z, std::hypot(v.x, v.y));
  const dis::EulerAngles local = frame.dis_to_local(
      {pdu.orientation[0], pdu.orientation[1], pdu.orientation[2]});
  s.bank = wrap_pi(local.phi);
  s.throttle = 0.0;
  s.fuel_fraction = 1.0;
  m.alive = (pdu.appearance & dis::kAppearanceDamageMask) != dis::kAppearanceDestroyed;
  return m;
}

combat::ActionCommand quantize(const combat::ActionCommand& command) {
  const auto f = [](double v, double lo, double hi) {
    return static_cast<double>(static_cast<float>(clamp_unit(v, lo, hi)));
  };
  combat::ActionCommand q = command;
  q.control.throttle = f(command.control.throttle, 0.0, 1.0);
  q.control.pitch_cmd = f(command.control.pitch_cmd, -1.0, 1.0);
  q.control.roll_cmd = f(command.control.roll_cmd, -1.0, 1.0);
  return q;
}

dis::ActionDataPdu to_action_data(const EntityId& originator, const EntityId& target,
                                  const combat::ActionCommand& command, std::uint8_t exercise_id,
                                  std::uint32_t timestamp, std::uint32_t request_id) {
  const combat::ActionCommand q = quantize(command);
  dis::ActionDataPdu pdu;
  pdu.header.exercise_id = exercise_id;
  pdu.header.timestamp = timestamp;
  pdu.originator = originator;
  pdu.entity_id = target;
  pdu.request_id = request_id;
  pdu.throttle = static_cast<float>(q.control.throttle);
  pdu.pitch_cmd = static_cast<float>(q.control.pitch_cmd);
  pdu.roll_cmd = static_cast<float>(q.control.roll_cmd);
  pdu.fire = q.fire;
  return pdu;
}

combat::ActionCommand from_action_data(const dis::ActionDataPdu& pdu) {
  combat::ActionCommand c;
  c.control.throttle = pdu.throttle;
  c.control.pitch_cmd = pdu.pitch_cmd;
  c.control.roll_cmd = pdu.roll_cmd;
  c.fire = pdu.fire;
  return c;
}

double max_acceleration(const flightdyn::AirframeConstants& k) {
  return k.max_thrust / k.mass + kGravity + (k.max_load_factor + 1.0) * kGravity;
}

double dead_reckoning_bound(double gap, double step, const flightdyn::AirframeConstants& k) {
  // Each integration step moves along an average of stage velocities, which
  // can lead the sampled velocity by up to one step.
  return 0.5 * max_acceleration(k) * gap * (gap + step);
}

// ---------------------------------------------------------------------------

combat::ScenarioConfig bridge_scenario(const combat::ScenarioConfig& scenario, double send_rate) {
  combat::ScenarioConfig c = scenario;
  c.rules.decision_dt = 1.0 / send_rate;
  c.rules.substeps = std::max(1, static_cast<int>(std::lround(c.rules.decision_dt /
                                                              flightdyn::kIntegrationStep)));
  return c;
}

BridgeCore::BridgeCore(BridgeConfig config, const agents::ScenarioFile& scenario,
                       const agents::ControllerFactory& blue, const agents::ControllerFactory& red,
                       std::uint64_t seed)
    : config_(std::move(config)), frame_(scenario.origin) {
  validate(config_);
  combat::ScenarioConfig sc = bridge_scenario(scenario.scenario, config_.send_rate);
  sc.seed = seed;
  world_ = combat::reset(sc);
  if (config_.roster.empty()) config_.roster = default_roster(sc);
  for (const auto& [id, who] : config_.roster) {
    if (!world_.aircraft.count(id)) {
      throw ConfigError("roster entity " + dis::to_string(id) + " is not in the scenario");
    }
  }
  for (const auto& [id, rec] : world_.aircraft) {
    const auto it = config_.roster.find(id);
    if (it == config_.roster.end()) config_.roster[id] = ControlledBy::kAgent;
    combat::set_external(world_, id, config_.roster[id] == ControlledBy::kExternal);
  }
  blue_ = blue();
  red_ = red();
  blue_->begin_episode(world_, Team::kBlue, agents::controller_seed(seed, Team::kBlue));
  red_->begin_episode(world_, Team::kRed, agents::controller_seed(seed, Team::kRed));
}

bool BridgeCore::accept(const dis::Pdu& pdu) {
  if (const auto* es = std::get_if<dis::EntityStatePdu>(&pdu)) {
    const auto it = config_.roster.find(es->entity_id);
    if (it != config_.roster.end() && it->second == ControlledBy::kExternal) {
      pending_[es->entity_id] = from_entity_state(*es, frame_);
      return true;
    }
  }
  ++stats_.ignored;
  return false;
}

bool BridgeCore::ingest(std::span<const std::uint8_t> bytes) {
  const auto pdu = screen_datagram(bytes, config_.filter, stats_);
  if (!pdu) return false;
  ++stats_.accepted;
  return accept(*pdu);
}

std::vector<dis::Bytes> BridgeCore::tick() {
  // Latest state per entity wins when several arrived since the last tick.
  for (const auto& [id, m] : pending_) combat::apply_external_state(world_, id, m.state, m.alive);
  pending_.clear();

  // Stamps follow simulation time, which stops when the episode ends, so a
  // frozen heartbeat repeats its timestamp instead of implying motion.
  const auto decision_stamp = dis::relative_timestamp(world_.time);
  ++ticks_;

  last_actions_.clear();
  if (!world_.done) {
    for (const auto& [id, command] : agents::decide_joint(world_, *blue_, *red_)) {
      last_actions_.emplace(id, quantize(command));
    }
    combat::step(world_, last_actions_);
  }
  const auto state_stamp = dis::relative_timestamp(world_.time);

  std::vector<dis::Bytes> out;
  const std::uint8_t exercise = config_.filter.exercise_id;
  if (config_.mode == BridgeMode::kState) {
    for (const auto& [id, who] : config_.roster) {
      if (who != ControlledBy::kAgent) continue;
      const auto& rec = world_.aircraft.at(id);
      out.push_back(dis::encode(
          to_entity_state(id, rec.state, rec.team, rec.alive, frame_, exercise, state_stamp)));
    }
  } else {
    for (const auto& [id, command] : last_actions_) {
      out.push_back(dis::encode(
          to_action_data(config_.originator, id, command, exercise, decision_stamp, request_id_++)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Bridge::Bridge(std::unique_ptr<BridgeCore> core)
    : core_(std::move(core)), socket_(core_->config().listen, core_->config().broadcast) {}

void Bridge::run(std::stop_token stop) {
  using Clock = std::chrono::steady_clock;
  const BridgeConfig& config = core_->config();
  BoundedQueue<dis::Pdu> queue(config.queue_capacity);
  BridgeStats& stats = core_->stats();

  std::jthread receiver([&](std::stop_token own) {
    while (!own.stop_requested() && !stop.stop_requested()) {
      auto datagram = socket_.receive(std::chrono::milliseconds(10));
      if (!datagram) continue;
      auto pdu = screen_datagram(*datagram, config.filter, stats);
      if (!pdu) continue;
      if (queue.try_push(std::move(*pdu))) {
        ++stats.accepted;
      } else {
        ++stats.dropped;
      }
    }
  });

  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / config.send_rate));
  auto next = Clock::now();
  std::vector<dis::Pdu> batch;
  while (!stop.stop_requested()) {
    queue.wait_until(stop, next);
    batch.clear();
    queue.drain(batch);
    for (const auto& pdu : batch) core_->accept(pdu);
    if (Clock::now() < next) continue;

    for (const auto& datagram : core_->tick()) {
      if (socket_.send_to(datagram, config.destination)) {
        ++stats.sent;
      } else {
        ++stats.send_failed;
      }
    }
    next += period;
    // After a stall, resume the schedule instead of bursting to catch up.
    if (Clock::now() - next > std::chrono::seconds(1)) next = Clock::now();
  }
  receiver.request_stop();
  receiver.join();
  socket_.close();
}

}  // namespace acsim::bridge
