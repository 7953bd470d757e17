#pragma once

// Live scenario with human pilots. Single-threaded and deterministic: the
// server feeds it queued joins and inputs between ticks.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "acsim/agents/episode.hpp"
#include "acsim/gateway/record.hpp"

namespace acsim::gateway {

using ClientId = std::uint64_t;

struct LiveOptions {
  std::string blue = "commander";
  std::string red = "mixed";
  std::optional<agents::CommanderParams> params;
  int snapshot_every = 2;  // ticks; 20 Hz decisions give 10 Hz snapshots
  std::string mode = "live";
};

struct InputLatency {
  std::uint64_t inputs = 0;
  std::uint64_t max_ticks = 0;  // ticks between receipt and application
  double mean_ticks = 0.0;
};

struct Seat {
  EntityId entity;
  Team team = Team::kBlue;
  combat::ActionCommand input;        // last write wins
  std::uint64_t input_received = 0;   // tick count at receipt of the newest unapplied input
  bool input_pending = false;
  InputLatency latency;
};

// Error codes sent to clients.
namespace error_code {
inline constexpr const char* kSlotTaken = "slot-taken";
inline constexpr const char* kAlreadyJoined = "already-joined";
inline constexpr const char* kNotJoined = "not-joined";
inline constexpr const char* kUnknownEntity = "unknown-entity";
inline constexpr const char* kEpisodeOver = "episode-over";
inline constexpr const char* kBadMessage = "bad-message";
}  // namespace error_code

struct JoinRejected {
  std::string code;
};

struct TickOutput {
  TickRecord record;
  std::optional<nlohmann::json> snapshot;  // a tick message when one is due
  bool finished = false;                   // the episode ended on this tick
};

class LiveSim {
 public:
  LiveSim(const agents::ScenarioFile& scenario, std::uint64_t seed, LiveOptions options = {},
          RecordWriter* recorder = nullptr);

  // Claims a free human slot of `team` (lowest entity number first), or the
  // given entity when it is a free human slot of that team.
  std::variant<EntityId, JoinRejected> join(ClientId client, Team team,
                                            std::optional<EntityId> entity = std::nullopt);
  // The entity returns to agent control.
  void leave(ClientId client);
  // Stored until the next tick; a later input for the same tick replaces it.
  // `received_at` is the tick count when the input arrived (default: now).
  // Returns false when the client holds no seat.
  bool set_input(ClientId client, const combat::ActionCommand& input,
                 std::optional<std::uint64_t> received_at = std::nullopt);

  // One decision step. Throws ContractViolation once finished.
  TickOutput tick();

  bool finished() const { return world_.done; }
  const agents::ScenarioFile& scenario() const { return scenario_; }
  const combat::WorldState& world() const { return world_; }
  std::uint64_t ticks() const { return world_.step_count; }
  double decision_dt() const { return world_.config.rules.decision_dt; }
  const std::map<ClientId, Seat>& seats() const { return seats_; }
  const std::vector<Participant>& participants() const { return participants_; }
  std::optional<EntityId> seat_of(ClientId client) const;

  // Current tick message: {"type":"tick","t","entities","events"} with the
  // events logged since the previous snapshot.
  nlohmann::json snapshot_message() const;
  nlohmann::json end_message() const;
  RecordFooter footer() const;

 private:
  bool is_human_slot(const EntityId& id, Team team) const;

  agents::ScenarioFile scenario_;
  LiveOptions options_;
  RecordWriter* recorder_;
  combat::WorldState world_;
  std::unique_ptr<agents::Controller> blue_;
  std::unique_ptr<agents::Controller> red_;
  std::map<ClientId, Seat> seats_;
  std::vector<Participant> participants_;
  std::vector<Participant> joined_since_tick_;
  std::map<EntityId, std::vector<double>> rewards_;
  std::size_t snapshot_events_ = 0;  // event log index already sent
};

// Range-clamps a pilot command.
combat::ActionCommand clamp_input(const combat::ActionCommand& input);

// Entity list of a tick message for the given world.
nlohmann::json entities_json(const combat::WorldState& world, const std::map<ClientId, Seat>& seats);

}  // namespace acsim::gateway
