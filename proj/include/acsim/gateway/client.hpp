#pragma once

// Minimal pilot client for loopback tests and scripted inputs. Received
// messages are buffered in arrival order.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "acsim/gateway/protocol.hpp"

namespace acsim::gateway {

class PilotClient {
 public:
  // Connects and completes the handshake. Throws std::runtime_error.
  PilotClient(const std::string& host, std::uint16_t port);
  ~PilotClient();
  PilotClient(const PilotClient&) = delete;
  PilotClient& operator=(const PilotClient&) = delete;

  void send(const ClientMessage& message);
  void send_raw(const std::string& text);

  // Oldest unread message, waiting up to `timeout`.
  std::optional<nlohmann::json> next(std::chrono::milliseconds timeout);
  // Skips messages until one of `type` arrives.
  std::optional<nlohmann::json> wait_for(const std::string& type, std::chrono::milliseconds timeout);

  // True once the server closed the connection; close_code() is then the
  // code it sent (1000 normal, 1001 going away, 1008 policy violation).
  bool closed() const;
  std::optional<int> close_code() const;
  bool wait_closed(std::chrono::milliseconds timeout) const;

  void close();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace acsim::gateway
