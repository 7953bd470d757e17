#include "acsim/bridge/peer.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "acsim/bounded_queue.hpp"

namespace acsim::bridge {

namespace {

constexpr double kHour = 3600.0;

bool destroyed(const dis::EntityStatePdu& pdu) {
  return (pdu.appearance & dis::kAppearanceDamageMask) == dis::kAppearanceDestroyed;
}

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// Covers float32 rounding of the transmitted velocity and the 1.7 us
// timestamp resolution at full speed.
constexpr double kQuantizationSlack = 1e-2;

}  // namespace

std::optional<TrackMirror::Update> TrackMirror::update(const dis::EntityStatePdu& pdu) {
  const auto it = tracks_.find(pdu.entity_id);
  std::optional<Update> result;
  if (it != tracks_.end()) {
    double gap = dis::timestamp_seconds(pdu.header.timestamp) -
                 dis::timestamp_seconds(it->second.header.timestamp);
    if (gap < -kHour / 2) gap += kHour;
    // A repeated timestamp is a heartbeat of a frozen state, and a destroyed
    // aircraft no longer follows its velocity; neither says anything about
    // dead reckoning.
    if (gap > 0.0 && !destroyed(pdu) && !destroyed(it->second)) {
      Update u;
      u.gap = gap;
      u.error = distance(dis::dead_reckon(it->second, gap), pdu.location);
      const double bound = dead_reckoning_bound(gap) + kQuantizationSlack;
      ++samples_;
      if (u.error > bound) ++violations_;
      max_error_ = std::max(max_error_, u.error);
      worst_ratio_ = std::max(worst_ratio_, u.error / bound);
      result = u;
    }
  }
  tracks_[pdu.entity_id] = pdu;
  return result;
}

std::optional<std::array<double, 3>> TrackMirror::location(const EntityId& id, double seconds) const {
  const auto it = tracks_.find(id);
  if (it == tracks_.end()) return std::nullopt;
  double dt = seconds - dis::timestamp_seconds(it->second.header.timestamp);
  if (dt < -kHour / 2) dt += kHour;
  return dis::dead_reckon(it->second, std::max(0.0, dt));
}

const dis::EntityStatePdu* TrackMirror::last(const EntityId& id) const {
  const auto it = tracks_.find(id);
  return it == tracks_.end() ? nullptr : &it->second;
}

FlightScript turning_script() {
  return [](const flightdyn::AircraftState& s, double) {
    try {
      return flightdyn::coordinated_turn(s.speed, s.altitude(), deg_to_rad(15.0));
    } catch (const flightdyn::InfeasibleTrim&) {
      return flightdyn::ControlInput{1.0, flightdyn::pitch_for_load_factor(1.0), 0.0};
    }
  };
}

// ---------------------------------------------------------------------------

PeerCore::PeerCore(const agents::ScenarioFile& scenario, const Roster& roster, PeerOptions options,
                   std::uint64_t seed)
    : options_(std::move(options)), frame_(scenario.origin) {
  if (!(options_.rate >= 1.0 && options_.rate <= 100.0)) {
    throw combat::ConfigError("peer rate must lie in [1, 100] Hz");
  }
  if (!(options_.integration_step > 0.0)) throw combat::ConfigError("integration step must be > 0");
  combat::ScenarioConfig sc = bridge_scenario(scenario.scenario, options_.rate);
  sc.seed = seed;
  const combat::WorldState initial = combat::reset(sc);
  for (const auto& [id, rec] : initial.aircraft) {
    const auto it = roster.find(id);
    const bool external = it != roster.end() && it->second == ControlledBy::kExternal;
    Simulated sim{rec.state, rec.team, {}};
    (external ? owned_ : agents_).emplace(id, sim);
  }
}

void PeerCore::accept(const dis::Pdu& pdu) {
  if (const auto* es = std::get_if<dis::EntityStatePdu>(&pdu)) {
    if (agents_.count(es->entity_id)) {
      mirror_.update(*es);
      return;
    }
  } else if (const auto* action = std::get_if<dis::ActionDataPdu>(&pdu)) {
    const auto it = agents_.find(action->entity_id);
    if (it != agents_.end()) {
      it->second.command = from_action_data(*action);
      ++actions_received_;
      return;
    }
  }
  ++stats_.ignored;
}

bool PeerCore::ingest(std::span<const std::uint8_t> bytes) {
  const auto pdu = screen_datagram(bytes, options_.filter, stats_);
  if (!pdu) return false;
  ++stats_.accepted;
  accept(*pdu);
  return true;
}

std::vector<dis::Bytes> PeerCore::tick() {
  const double period = 1.0 / options_.rate;
  const int n = std::max(1, static_cast<int>(std::lround(period / options_.integration_step)));
  const double dt = period / n;
  const double now = time();

  for (auto& [id, sim] : owned_) {
    const flightdyn::ControlInput input = options_.script(sim.state, now);
    for (int i = 0; i < n; ++i) sim.state = flightdyn::step(sim.state, input, dt);
  }
  if (options_.mode == BridgeMode::kAction) {
    for (auto& [id, sim] : agents_) {
      for (int i = 0; i < n; ++i) sim.state = flightdyn::step(sim.state, sim.command.control, dt);
    }
  }
  ++ticks_;

  const auto stamp = dis::relative_timestamp(time());
  const std::uint8_t exercise = options_.filter.exercise_id;
  std::vector<dis::Bytes> out;
  for (const auto& [id, sim] : owned_) {
    out.push_back(dis::encode(to_entity_state(id, sim.state, sim.team, true, frame_, exercise, stamp)));
  }
  if (options_.mode == BridgeMode::kAction) {
    for (const auto& [id, sim] : agents_) {
      out.push_back(
          dis::encode(to_entity_state(id, sim.state, sim.team, true, frame_, exercise, stamp)));
    }
  }
  return out;
}

std::optional<Vec3> PeerCore::agent_position(const EntityId& id) const {
  if (options_.mode == BridgeMode::kAction) {
    const auto it = agents_.find(id);
    if (it == agents_.end()) return std::nullopt;
    return it->second.state.position;
  }
  const dis::EntityStatePdu* last = mirror_.last(id);
  if (last == nullptr) return std::nullopt;
  return frame_.ecef_to_ned({last->location[0], last->location[1], last->location[2]});
}

std::optional<Vec3> PeerCore::owned_position(const EntityId& id) const {
  const auto it = owned_.find(id);
  if (it == owned_.end()) return std::nullopt;
  return it->second.state.position;
}

// ---------------------------------------------------------------------------

LoopbackPeer::LoopbackPeer(std::unique_ptr<PeerCore> core, const Endpoint& listen,
                           const Endpoint& destination)
    : core_(std::move(core)), socket_(listen), destination_(destination) {}

void LoopbackPeer::run(std::stop_token stop) {
  using Clock = std::chrono::steady_clock;
  BoundedQueue<std::vector<std::uint8_t>> queue(4096);
  BridgeStats& stats = core_->stats();

  std::jthread receiver([&](std::stop_token own) {
    while (!own.stop_requested() && !stop.stop_requested()) {
      auto datagram = socket_.receive(std::chrono::milliseconds(10));
      if (datagram && !queue.try_push(std::move(*datagram))) ++stats.dropped;
    }
  });

  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / core_->rate()));
  auto next = Clock::now();
  std::vector<std::vector<std::uint8_t>> batch;
  while (!stop.stop_requested()) {
    queue.wait_until(stop, next);
    batch.clear();
    queue.drain(batch);
    for (const auto& datagram : batch) core_->ingest(datagram);
    if (Clock::now() < next) continue;
    for (const auto& datagram : core_->tick()) {
      if (socket_.send_to(datagram, destination_)) {
        ++stats.sent;
      } else {
        ++stats.send_failed;
      }
    }
    next += period;
    if (Clock::now() - next > std::chrono::seconds(1)) next = Clock::now();
  }
  receiver.request_stop();
  receiver.join();
  socket_.close();
}

// ---------------------------------------------------------------------------

namespace {

using Trace = std::vector<std::map<EntityId, Vec3>>;

Trace run_mode(const agents::ScenarioFile& scenario, double duration, BridgeMode mode,
               const EquivalenceOptions& options) {
  BridgeConfig config;
  config.mode = mode;
  config.send_rate = options.send_rate;
  BridgeCore bridge(config, scenario, agents::make_controller_factory(options.blue),
                    agents::make_controller_factory(options.red), options.seed);
  PeerOptions peer_options;
  peer_options.mode = mode;
  peer_options.rate = options.send_rate;
  peer_options.integration_step = options.receiver_integration_step;
  peer_options.filter = config.filter;
  PeerCore peer(scenario, bridge.roster(), peer_options, options.seed);

  Trace trace;
  const auto ticks = static_cast<long>(std::lround(duration * options.send_rate));
  for (long k = 0; k < ticks && !bridge.world().done; ++k) {
    for (const auto& datagram : bridge.tick()) peer.ingest(datagram);
    for (const auto& datagram : peer.tick()) bridge.ingest(datagram);
    auto& sample = trace.emplace_back();
    for (const auto& [id, who] : bridge.roster()) {
      if (who != ControlledBy::kAgent || !bridge.world().aircraft.at(id).alive) continue;
      if (const auto p = peer.agent_position(id)) sample[id] = *p;
    }
  }
  return trace;
}

}  // namespace

EquivalenceReport mode_equivalence_check(const agents::ScenarioFile& scenario, double duration,
                                         const EquivalenceOptions& options) {
  if (!(duration >= 0.0)) throw ContractViolation("mode_equivalence_check: duration must be >= 0");
  const Trace state = run_mode(scenario, duration, BridgeMode::kState, options);
  const Trace action = run_mode(scenario, duration, BridgeMode::kAction, options);
  EquivalenceReport report;
  const std::size_t n = std::min(state.size(), action.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& [id, p] : state[k]) {
      const auto it = action[k].find(id);
      if (it == action[k].end()) continue;
      report.max_divergence = std::max(report.max_divergence, (p - it->second).norm());
      ++report.samples;
    }
  }
  return report;
}

}  // namespace acsim::bridge
