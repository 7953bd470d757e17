#pragma once

// DIS network loop. A receiver thread decodes and filters datagrams and queues
// the accepted PDUs; the main loop owns the world, applies queued states,
// computes agent actions and sends either entity states or action PDUs.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string_view>
#include <vector>

#include "acsim/agents/episode.hpp"
#include "acsim/agents/files.hpp"
#include "acsim/bridge/udp.hpp"
#include "acsim/dis/codec.hpp"
#include "acsim/dis/geo.hpp"

namespace acsim::bridge {

using combat::EntityId;
using combat::Team;

struct VrfFilter {
  std::uint8_t exercise_id = 1;
  std::optional<std::uint16_t> site;         // absent matches any
  std::optional<std::uint16_t> application;  // absent matches any

  bool matches(std::uint8_t exercise, const EntityId& id) const;
  // Entity states match on their entity id, action PDUs on the commanded entity.
  bool matches(const dis::Pdu& pdu) const;
};

// kState: the bridge integrates agent aircraft and sends entity states.
// kAction: the bridge sends the computed actions for a remote simulator.
enum class BridgeMode { kState, kAction };
std::string_view to_string(BridgeMode mode);
std::optional<BridgeMode> parse_mode(std::string_view text);

enum class ControlledBy { kAgent, kExternal };
using Roster = std::map<EntityId, ControlledBy>;

// Human slots (lowest entity numbers of each team) are external, the rest agents.
Roster default_roster(const combat::ScenarioConfig& scenario);

struct BridgeConfig {
  Endpoint listen{"0.0.0.0", 3000};
  Endpoint destination{"127.0.0.1", 3001};
  BridgeMode mode = BridgeMode::kState;
  double send_rate = 10.0;  // Hz, also the local decision rate
  VrfFilter filter;
  Roster roster;  // empty selects default_roster
  bool broadcast = false;
  std::size_t queue_capacity = 4096;
  EntityId originator{1, 100, 0};  // sender id stamped on action PDUs
};

// Throws combat::ConfigError.
void validate(const BridgeConfig& config);

// Plain copy of the counters.
struct BridgeCounters {
  std::uint64_t received = 0;     // datagrams read from the socket
  std::uint64_t accepted = 0;     // queued for the main loop
  std::uint64_t dropped = 0;      // queue full
  std::uint64_t malformed = 0;    // failed to decode
  std::uint64_t unsupported = 0;  // well-formed PDU of a type the bridge ignores
  std::uint64_t filtered = 0;     // rejected by the filter
  std::uint64_t ignored = 0;      // accepted but about no external entity
  std::uint64_t sent = 0;
  std::uint64_t send_failed = 0;
  double last_receive = -1.0;     // s on the steady clock, -1 before the first datagram

  bool operator==(const BridgeCounters&) const = default;
};

// Monotone counters shared by the receiver and the main loop.
struct BridgeStats {
  std::atomic<std::uint64_t> received{0};
  std::atomic<std::uint64_t> accepted{0};
  std::atomic<std::uint64_t> dropped{0};
  std::atomic<std::uint64_t> malformed{0};
  std::atomic<std::uint64_t> unsupported{0};
  std::atomic<std::uint64_t> filtered{0};
  std::atomic<std::uint64_t> ignored{0};
  std::atomic<std::uint64_t> sent{0};
  std::atomic<std::uint64_t> send_failed{0};
  std::atomic<double> last_receive{-1.0};

  BridgeCounters snapshot() const;
};

// Decodes and filters one datagram, counting it in `stats`. Returns the PDU
// only when it should be handed to the main loop.
std::optional<dis::Pdu> screen_datagram(std::span<const std::uint8_t> bytes, const VrfFilter& filter,
                                        BridgeStats& stats);

// ---------------------------------------------------------------------------
// Wire conversions

dis::EntityStatePdu to_entity_state(const EntityId& id, const flightdyn::AircraftState& state,
                                    Team team, bool alive, const dis::LocalFrame& frame,
                                    std::uint8_t exercise_id, std::uint32_t timestamp);

struct MirroredState {
  flightdyn::AircraftState state;
  bool alive = true;
};

// Throttle and fuel are not on the wire and come back as 0 and 1.
MirroredState from_entity_state(const dis::EntityStatePdu& pdu, const dis::LocalFrame& frame);

// Rounds every command to the float32 values the action PDU carries, so a
// local integrator and a remote one see bit-identical inputs.
combat::ActionCommand quantize(const combat::ActionCommand& command);

dis::ActionDataPdu to_action_data(const EntityId& originator, const EntityId& target,
                                  const combat::ActionCommand& command, std::uint8_t exercise_id,
                                  std::uint32_t timestamp, std::uint32_t request_id);
combat::ActionCommand from_action_data(const dis::ActionDataPdu& pdu);

// Largest acceleration a point-mass airframe can reach: full thrust plus
// gravity along the path, maximum load plus gravity across it.
double max_acceleration(const flightdyn::AirframeConstants& k = flightdyn::kDefaultAirframe);

// Bound on |position - dead-reckoned position| after `gap` seconds of
// integration at step `step`.
double dead_reckoning_bound(double gap, double step = flightdyn::kIntegrationStep,
                            const flightdyn::AirframeConstants& k = flightdyn::kDefaultAirframe);

// ---------------------------------------------------------------------------
// Deterministic core: no sockets and no clocks. The world advances one
// decision step of 1 / send_rate seconds per tick.

class BridgeCore {
 public:
  BridgeCore(BridgeConfig config, const agents::ScenarioFile& scenario,
             const agents::ControllerFactory& blue, const agents::ControllerFactory& red,
             std::uint64_t seed);

  // Queues the state of an external entity for the next tick. Returns true
  // when the PDU updated an external entity.
  bool accept(const dis::Pdu& pdu);

  // screen_datagram followed by accept.
  bool ingest(std::span<const std::uint8_t> bytes);

  // Applies queued external states, computes every agent action, advances the
  // local world and returns the datagrams to send. After the episode ends the
  // world is frozen; state mode keeps sending it as a heartbeat.
  std::vector<dis::Bytes> tick();

  const combat::WorldState& world() const { return world_; }
  const BridgeConfig& config() const { return config_; }
  const Roster& roster() const { return config_.roster; }
  const dis::LocalFrame& frame() const { return frame_; }
  BridgeStats& stats() { return stats_; }
  const BridgeStats& stats() const { return stats_; }
  std::uint64_t ticks() const { return ticks_; }
  // Actions computed in the last tick, after quantization.
  const combat::JointAction& last_actions() const { return last_actions_; }

 private:
  BridgeConfig config_;
  dis::LocalFrame frame_;
  combat::WorldState world_;
  std::unique_ptr<agents::Controller> blue_;
  std::unique_ptr<agents::Controller> red_;
  std::map<EntityId, MirroredState> pending_;
  combat::JointAction last_actions_;
  BridgeStats stats_;
  std::uint64_t ticks_ = 0;
  std::uint32_t request_id_ = 0;
};

// Scenario copy whose decision step matches the bridge rate at ~100 Hz integration.
combat::ScenarioConfig bridge_scenario(const combat::ScenarioConfig& scenario, double send_rate);

// Socket runner around a BridgeCore.
class Bridge {
 public:
  // Binds the listen endpoint; throws SocketError on failure.
  explicit Bridge(std::unique_ptr<BridgeCore> core);

  Endpoint local_endpoint() const { return socket_.local_endpoint(); }

  // Runs until stop is requested, then joins the receiver and closes the socket.
  void run(std::stop_token stop);

  // Not synchronized with run(); read after it returns.
  const BridgeCore& core() const { return *core_; }
  const BridgeStats& stats() const { return core_->stats(); }

 private:
  std::unique_ptr<BridgeCore> core_;
  UdpSocket socket_;
};

}  // namespace acsim::bridge
