#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acsim::bridge {

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "0.0.0.0";
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

// "host:port" with a dotted IPv4 host or "localhost". Throws std::invalid_argument.
Endpoint parse_endpoint(const std::string& text);

// IPv4 datagram socket; closed on destruction.
class UdpSocket {
 public:
  UdpSocket() = default;
  // Binds to `local`; port 0 picks an ephemeral port. Throws SocketError.
  explicit UdpSocket(const Endpoint& local, bool broadcast = false);
  ~UdpSocket();

  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  bool is_open() const { return fd_ >= 0; }
  void close();
  Endpoint local_endpoint() const;

  // False when the kernel refused the datagram.
  bool send_to(std::span<const std::uint8_t> bytes, const Endpoint& dest);

  // Waits up to `timeout` for one datagram; nullopt on timeout.
  std::optional<std::vector<std::uint8_t>> receive(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
};

}  // namespace acsim::bridge
