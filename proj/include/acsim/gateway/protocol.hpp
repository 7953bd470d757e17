#pragma once

// WebSocket JSON protocol between the gateway and pilot clients; frozen in
// docs/protocol.md.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "acsim/combat/types.hpp"

namespace acsim::gateway {

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// {"type":"join","team":"blue"} with an optional "entity":[s,a,e]
struct JoinMessage {
  combat::Team team = combat::Team::kBlue;
  std::optional<combat::EntityId> entity;
};

// {"type":"control","throttle":f,"pitch":f,"roll":f,"fire":b}; values are
// clamped to their ranges on receipt.
struct ControlMessage {
  combat::ActionCommand command;
};

// {"type":"ping","t":ms}
struct PingMessage {
  double t = 0.0;
};

// {"type":"leave"}
struct LeaveMessage {};

using ClientMessage = std::variant<JoinMessage, ControlMessage, PingMessage, LeaveMessage>;

// Throws ProtocolError with code "bad-message" on anything off-schema.
ClientMessage parse_client_message(std::string_view text);

nlohmann::json joined_message(const combat::EntityId& entity);
nlohmann::json error_message(const std::string& code);
nlohmann::json pong_message(double client_t, double server_t);

// Serializes a client message; used by loopback clients and tests.
nlohmann::json to_json(const ClientMessage& message);

}  // namespace acsim::gateway
