#include "acsim/bridge/udp.hpp"

#include <arpa/inet.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace acsim::bridge {

namespace {

sockaddr_in to_sockaddr(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(e.port);
  const std::string host = e.host == "localhost" ? "127.0.0.1" : e.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw SocketError("bad IPv4 address '" + e.host + "'");
  }
  return addr;
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Largest UDP payload over IPv4.
constexpr std::size_t kMaxDatagram = 65507;

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("expected host:port, got '" + text + "'");
  }
  Endpoint e;
  e.host = text.substr(0, colon);
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port > 65535) {
    throw std::invalid_argument("bad port in '" + text + "'");
  }
  e.port = static_cast<std::uint16_t>(port);
  in_addr probe{};
  if (e.host != "localhost" && inet_pton(AF_INET, e.host.c_str(), &probe) != 1) {
    throw std::invalid_argument("bad IPv4 address in '" + text + "'");
  }
  return e;
}

UdpSocket::UdpSocket(const Endpoint& local, bool broadcast) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw SocketError(errno_text("socket"));
  const int one = 1;
  if (broadcast && ::setsockopt(fd_, SOL_SOCKET, SO_BROADCAST, &one, sizeof one) != 0) {
    const std::string msg = errno_text("setsockopt(SO_BROADCAST)");
    close();
    throw SocketError(msg);
  }
  const int buffer = 4 << 20;
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buffer, sizeof buffer);
  const sockaddr_in addr = to_sockaddr(local);
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text(("bind " + local.to_string()).c_str());
    close();
    throw SocketError(msg);
  }
}

UdpSocket::~UdpSocket() { close(); }

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void UdpSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Endpoint UdpSocket::local_endpoint() const {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw SocketError(errno_text("getsockname"));
  }
  char host[INET_ADDRSTRLEN] = {};
  ::inet_ntop(AF_INET, &addr.sin_addr, host, sizeof host);
  return {host, ntohs(addr.sin_port)};
}

bool UdpSocket::send_to(std::span<const std::uint8_t> bytes, const Endpoint& dest) {
  const sockaddr_in addr = to_sockaddr(dest);
  const ssize_t n = ::sendto(fd_, bytes.data(), bytes.size(), 0,
                             reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
  return n == static_cast<ssize_t>(bytes.size());
}

std::optional<std::vector<std::uint8_t>> UdpSocket::receive(std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0 || !(pfd.revents & POLLIN)) return std::nullopt;
  std::vector<std::uint8_t> buf(kMaxDatagram);
  const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return buf;
}

}  // namespace acsim::bridge
