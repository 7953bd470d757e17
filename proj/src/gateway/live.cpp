#include "acsim/gateway/live.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace acsim::gateway {

using nlohmann::json;

namespace {

json id_json(const EntityId& id) { return json::array({id.site, id.application, id.entity}); }

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json event_message(const combat::Event& e) {
  json j{{"t", e.time}, {"kind", combat::to_string(e.kind)}};
  j["shooter"] = e.shooter ? id_json(*e.shooter) : json(nullptr);
  j["target"] = e.target ? id_json(*e.target) : json(nullptr);
  return j;
}

}  // namespace

combat::ActionCommand clamp_input(const combat::ActionCommand& input) {
  combat::ActionCommand c = input;
  const auto finite_or = [](double v, double fallback) { return std::isfinite(v) ? v : fallback; };
  c.control.throttle = clamp_unit(finite_or(input.control.throttle, 0.0), 0.0, 1.0);
  c.control.pitch_cmd = clamp_unit(finite_or(input.control.pitch_cmd, 0.0));
  c.control.roll_cmd = clamp_unit(finite_or(input.control.roll_cmd, 0.0));
  return c;
}

json entities_json(const combat::WorldState& world, const std::map<ClientId, Seat>& seats) {
  json list = json::array();
  for (const auto& [id, rec] : world.aircraft) {
    bool human = false;
    for (const auto& [client, seat] : seats) human = human || seat.entity == id;
    const auto& s = rec.state;
    list.push_back({{"id", id_json(id)},
                    {"team", combat::to_string(rec.team)},
                    {"pos", vec_json(s.position)},
                    {"vel", vec_json(s.velocity())},
                    {"att", json::array({s.heading, s.flight_path_angle, s.bank})},
                    {"speed", s.speed},
                    {"alt", s.altitude()},
                    {"throttle", s.throttle},
                    {"hp", rec.hp},
                    {"policy", combat::to_string(rec.active_policy)},
                    {"alive", rec.alive},
                    {"human", human}});
  }
  return list;
}

LiveSim::LiveSim(const agents::ScenarioFile& scenario, std::uint64_t seed, LiveOptions options,
                 RecordWriter* recorder)
    : scenario_(scenario), options_(std::move(options)), recorder_(recorder) {
  if (options_.snapshot_every < 1) throw ContractViolation("LiveSim: snapshot_every must be >= 1");
  if (!agents::is_known_controller(options_.blue) || !agents::is_known_controller(options_.red)) {
    throw combat::ConfigError("unknown controller name");
  }
  combat::ScenarioConfig config = scenario_.scenario;
  config.seed = seed;
  world_ = combat::reset(config);
  const agents::CommanderParams* params = options_.params ? &*options_.params : nullptr;
  blue_ = agents::make_controller_factory(options_.blue, params)();
  red_ = agents::make_controller_factory(options_.red, params)();
  blue_->begin_episode(world_, Team::kBlue, agents::controller_seed(seed, Team::kBlue));
  red_->begin_episode(world_, Team::kRed, agents::controller_seed(seed, Team::kRed));
  for (const auto& [id, rec] : world_.aircraft) rewards_[id];

  if (recorder_ != nullptr) {
    RecordHeader header;
    header.scenario = scenario_;
    header.seed = seed;
    header.blue = options_.blue;
    header.red = options_.red;
    header.params = options_.params;
    header.mode = options_.mode;
    recorder_->write_line(to_json(header).dump());
    if (world_.done) {
      recorder_->write_line(to_json(footer()).dump());
      recorder_->flush();
    }
  }
}

bool LiveSim::is_human_slot(const EntityId& id, Team team) const {
  const auto it = world_.aircraft.find(id);
  if (it == world_.aircraft.end() || it->second.team != team) return false;
  const int slots = team == Team::kBlue ? world_.config.human_slots.blue : world_.config.human_slots.red;
  return id.entity >= 1 && id.entity <= slots;
}

std::variant<EntityId, JoinRejected> LiveSim::join(ClientId client, Team team,
                                                   std::optional<EntityId> entity) {
  if (world_.done) return JoinRejected{error_code::kEpisodeOver};
  if (seats_.count(client)) return JoinRejected{error_code::kAlreadyJoined};
  const auto taken = [&](const EntityId& id) {
    for (const auto& [c, seat] : seats_) {
      if (seat.entity == id) return true;
    }
    return false;
  };
  std::optional<EntityId> chosen;
  if (entity) {
    if (!is_human_slot(*entity, team)) return JoinRejected{error_code::kUnknownEntity};
    if (taken(*entity) || !world_.aircraft.at(*entity).alive) return JoinRejected{error_code::kSlotTaken};
    chosen = entity;
  } else {
    const int slots = team == Team::kBlue ? world_.config.human_slots.blue : world_.config.human_slots.red;
    for (int i = 0; i < slots && !chosen; ++i) {
      const EntityId id = combat::make_entity_id(team, i);
      if (!taken(id) && world_.aircraft.at(id).alive) chosen = id;
    }
    if (!chosen) return JoinRejected{error_code::kSlotTaken};
  }

  Seat seat;
  seat.entity = *chosen;
  seat.team = team;
  const auto& state = world_.aircraft.at(*chosen).state;
  seat.input.control = {state.throttle, flightdyn::pitch_for_load_factor(1.0), 0.0};
  seats_.emplace(client, seat);
  const Participant p{client, *chosen, team, world_.time};
  participants_.push_back(p);
  joined_since_tick_.push_back(p);
  return *chosen;
}

void LiveSim::leave(ClientId client) { seats_.erase(client); }

std::optional<EntityId> LiveSim::seat_of(ClientId client) const {
  const auto it = seats_.find(client);
  if (it == seats_.end()) return std::nullopt;
  return it->second.entity;
}

bool LiveSim::set_input(ClientId client, const combat::ActionCommand& input,
                        std::optional<std::uint64_t> received_at) {
  const auto it = seats_.find(client);
  if (it == seats_.end()) return false;
  Seat& seat = it->second;
  seat.input = clamp_input(input);
  if (!seat.input_pending) seat.input_received = received_at.value_or(world_.step_count);
  seat.input_pending = true;
  return true;
}

TickOutput LiveSim::tick() {
  if (world_.done) throw ContractViolation("LiveSim::tick: episode already finished");

  std::set<EntityId> human;
  for (const auto& [client, seat] : seats_) {
    if (world_.aircraft.at(seat.entity).alive) human.insert(seat.entity);
  }
  combat::JointAction joint = agents::decide_joint(world_, *blue_, *red_, human);
  for (auto& [client, seat] : seats_) {
    if (!human.count(seat.entity)) continue;
    joint[seat.entity] = seat.input;
    if (seat.input_pending) {
      // The input shapes the state this tick produces.
      const std::uint64_t delay = world_.step_count + 1 - std::min(seat.input_received, world_.step_count);
      auto& l = seat.latency;
      l.mean_ticks = (l.mean_ticks * static_cast<double>(l.inputs) + static_cast<double>(delay)) /
                     static_cast<double>(l.inputs + 1);
      ++l.inputs;
      l.max_ticks = std::max(l.max_ticks, delay);
      seat.input_pending = false;
    }
  }

  TickOutput out;
  TickRecord& rec = out.record;
  for (const auto& [id, action] : joint) rec.policies[id] = world_.aircraft.at(id).active_policy;
  const std::size_t events_before = world_.event_log.size();
  const combat::StepResult step = combat::step(world_, joint);
  for (const auto& [id, r] : step.rewards) rewards_[id].push_back(r);

  rec.step = world_.step_count;
  rec.time = world_.time;
  rec.hash = world_hash(world_);
  rec.actions = std::move(joint);
  rec.human.assign(human.begin(), human.end());
  rec.rewards = step.rewards;
  rec.events.assign(world_.event_log.begin() + static_cast<long>(events_before), world_.event_log.end());
  rec.joined = std::move(joined_since_tick_);
  joined_since_tick_.clear();
  if (recorder_ != nullptr) recorder_->write_line(to_json(rec).dump());

  out.finished = world_.done;
  if (world_.step_count % static_cast<std::uint64_t>(options_.snapshot_every) == 0 || out.finished) {
    out.snapshot = snapshot_message();
    snapshot_events_ = world_.event_log.size();
  }
  if (out.finished && recorder_ != nullptr) {
    recorder_->write_line(to_json(footer()).dump());
    recorder_->flush();
  }
  return out;
}

json LiveSim::snapshot_message() const {
  json events = json::array();
  for (std::size_t i = snapshot_events_; i < world_.event_log.size(); ++i) {
    events.push_back(event_message(world_.event_log[i]));
  }
  return {{"type", "tick"},
          {"t", world_.time},
          {"entities", entities_json(world_, seats_)},
          {"events", events}};
}

json LiveSim::end_message() const {
  return {{"type", "end"}, {"winner", combat::to_string(world_.winner)}};
}

RecordFooter LiveSim::footer() const {
  RecordFooter f;
  f.winner = world_.winner;
  f.steps = world_.step_count;
  f.participants = participants_;
  for (const auto& [id, stream] : rewards_) f.returns[id] = combat::discounted_return(stream, 0.99);
  return f;
}

}  // namespace acsim::gateway
