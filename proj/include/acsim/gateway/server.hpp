#pragma once

// WebSocket gateway: one sim-loop thread ticks a LiveSim in scaled real time
// and one I/O thread serves pilot clients. Each session has a bounded send
// queue; tick messages that do not fit are dropped for that client only.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "acsim/bridge/bridge.hpp"
#include "acsim/bridge/udp.hpp"
#include "acsim/gateway/live.hpp"

namespace acsim::gateway {

// Publishes the live world on DIS. Deterministic; the server owns the socket.
class DisPublisher {
 public:
  DisPublisher(const dis::Geodetic& origin, bridge::BridgeMode mode, std::uint8_t exercise_id = 1,
               EntityId originator = {1, 100, 0});

  // State mode: an EntityState PDU per aircraft. Action mode: an ActionData
  // PDU per action of the tick.
  std::vector<dis::Bytes> datagrams(const combat::WorldState& world, const TickRecord& record);

 private:
  dis::LocalFrame frame_;
  bridge::BridgeMode mode_;
  std::uint8_t exercise_id_;
  EntityId originator_;
  std::uint32_t request_id_ = 0;
};

struct DisOutput {
  bridge::Endpoint listen{"0.0.0.0", 0};  // local bind; nothing is read from it
  bridge::Endpoint destination{"127.0.0.1", 3001};
  bridge::BridgeMode mode = bridge::BridgeMode::kState;
  std::uint8_t exercise_id = 1;
  bool broadcast = false;
};

struct ServerOptions {
  std::string address = "0.0.0.0";
  std::uint16_t port = 8080;  // 0 picks an ephemeral port
  double time_scale = 1.0;    // sim seconds per wall second
  std::size_t send_queue = 32;
  std::size_t inbound_capacity = 4096;
  std::optional<DisOutput> dis;
  std::chrono::milliseconds linger{500};  // grace period to flush end messages
};

struct ServerStats {
  std::uint64_t connections = 0;
  std::uint64_t messages_in = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t inbound_dropped = 0;
  std::uint64_t snapshots_sent = 0;     // per client
  std::uint64_t snapshots_dropped = 0;  // per client
  std::uint64_t dis_sent = 0;
  std::uint64_t dis_failed = 0;
  std::uint64_t ticks = 0;
};

class GatewayServer {
 public:
  // Binds immediately so port() is valid. Throws std::runtime_error.
  GatewayServer(LiveSim& sim, ServerOptions options);
  ~GatewayServer();
  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  std::uint16_t port() const;

  // Ticks until the episode ends or `stop` fires, then sends "end", closes
  // every session and returns.
  void run(std::stop_token stop);

  ServerStats stats() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace acsim::gateway
