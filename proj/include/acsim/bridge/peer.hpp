#pragma once

// Loopback stand-in for the remote simulator: flies the external aircraft,
// mirrors agent aircraft from entity states (state mode) or integrates them
// from action PDUs (action mode), and answers with entity states.

#include <functional>
#include <map>
#include <optional>
#include <stop_token>

#include "acsim/bridge/bridge.hpp"

namespace acsim::bridge {

// Last entity state per entity, dead reckoned between updates.
class TrackMirror {
 public:
  struct Update {
    double gap = 0.0;    // s since the previous state of the same entity
    double error = 0.0;  // m between the dead-reckoned prediction and the new fix
  };

  // Returns the prediction check when a previous state exists.
  std::optional<Update> update(const dis::EntityStatePdu& pdu);

  // ECEF location dead reckoned to DIS time `seconds` past the hour.
  std::optional<std::array<double, 3>> location(const EntityId& id, double seconds) const;
  const dis::EntityStatePdu* last(const EntityId& id) const;

  std::size_t tracks() const { return tracks_.size(); }
  std::uint64_t samples() const { return samples_; }
  // Samples whose prediction error exceeded the dead-reckoning bound.
  std::uint64_t violations() const { return violations_; }
  double max_error() const { return max_error_; }
  // Largest error / bound over all samples.
  double worst_ratio() const { return worst_ratio_; }

 private:
  std::map<EntityId, dis::EntityStatePdu> tracks_;
  std::uint64_t samples_ = 0;
  std::uint64_t violations_ = 0;
  double max_error_ = 0.0;
  double worst_ratio_ = 0.0;
};

using FlightScript = std::function<flightdyn::ControlInput(const flightdyn::AircraftState&, double)>;

// Holds speed in a level 15 deg bank turn.
FlightScript turning_script();

struct PeerOptions {
  BridgeMode mode = BridgeMode::kState;  // what the bridge on the other end sends
  double rate = 10.0;                    // Hz, one tick per period
  double integration_step = flightdyn::kIntegrationStep;
  VrfFilter filter;
  FlightScript script = turning_script();  // flies the external aircraft
};

class PeerCore {
 public:
  PeerCore(const agents::ScenarioFile& scenario, const Roster& roster, PeerOptions options,
           std::uint64_t seed);

  bool ingest(std::span<const std::uint8_t> bytes);
  void accept(const dis::Pdu& pdu);

  // Advances owned aircraft (and in action mode the agent aircraft, under the
  // latest action) by one period; returns their entity states.
  std::vector<dis::Bytes> tick();

  double rate() const { return options_.rate; }
  double time() const { return static_cast<double>(ticks_) / options_.rate; }
  // The peer's view of an agent aircraft: integrated in action mode, the last
  // received fix in state mode. NED metres.
  std::optional<Vec3> agent_position(const EntityId& id) const;
  std::optional<Vec3> owned_position(const EntityId& id) const;

  const TrackMirror& mirror() const { return mirror_; }
  BridgeStats& stats() { return stats_; }
  const BridgeStats& stats() const { return stats_; }
  std::uint64_t actions_received() const { return actions_received_; }

 private:
  struct Simulated {
    flightdyn::AircraftState state;
    Team team = Team::kBlue;
    combat::ActionCommand command;
  };

  PeerOptions options_;
  dis::LocalFrame frame_;
  std::map<EntityId, Simulated> owned_;   // external aircraft this peer flies
  std::map<EntityId, Simulated> agents_;  // integrated from actions in action mode
  TrackMirror mirror_;
  BridgeStats stats_;
  std::uint64_t ticks_ = 0;
  std::uint64_t actions_received_ = 0;
};

// Socket runner around a PeerCore, same threading as Bridge.
class LoopbackPeer {
 public:
  LoopbackPeer(std::unique_ptr<PeerCore> core, const Endpoint& listen, const Endpoint& destination);

  Endpoint local_endpoint() const { return socket_.local_endpoint(); }
  void run(std::stop_token stop);

  const PeerCore& core() const { return *core_; }

 private:
  std::unique_ptr<PeerCore> core_;
  UdpSocket socket_;
  Endpoint destination_;
};

struct EquivalenceOptions {
  double send_rate = 10.0;
  double receiver_integration_step = flightdyn::kIntegrationStep;
  std::uint64_t seed = 0;
  std::string blue = "commander";
  std::string red = "commander";
};

struct EquivalenceReport {
  double max_divergence = 0.0;  // m
  int samples = 0;
};

// Runs the scenario for `duration` seconds through a bridge and a peer joined
// in-process, once in each mode, and compares the receiver's agent positions
// tick by tick while the episode is live.
EquivalenceReport mode_equivalence_check(const agents::ScenarioFile& scenario, double duration,
                                         const EquivalenceOptions& options = {});

}  // namespace acsim::bridge
