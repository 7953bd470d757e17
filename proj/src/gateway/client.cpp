#include "acsim/gateway/client.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace acsim::gateway {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct PilotClient::Impl {
  net::io_context ioc{1};
  websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  std::deque<std::shared_ptr<const std::string>> outgoing;  // I/O thread only
  bool writing = false;
  bool closing = false;

  mutable std::mutex mutex;
  mutable std::condition_variable changed;
  std::deque<nlohmann::json> inbox;
  bool closed = false;
  std::optional<int> code;
  std::thread io;

  void do_read() {
    ws.async_read(buffer, [this](beast::error_code ec, std::size_t) {
      if (ec) return mark_closed();
      const std::string text = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      {
        std::lock_guard lock(mutex);
        inbox.push_back(nlohmann::json::parse(text, nullptr, false));
      }
      changed.notify_all();
      do_read();
    });
  }

  void do_write() {
    writing = true;
    ws.async_write(net::buffer(*outgoing.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) return mark_closed();
      outgoing.pop_front();
      if (!outgoing.empty()) return do_write();
      writing = false;
      if (closing) do_close();
    });
  }

  void do_close() {
    ws.async_close(websocket::close_code::normal, [this](beast::error_code) { mark_closed(); });
  }

  void mark_closed() {
    {
      std::lock_guard lock(mutex);
      if (closed) return;
      closed = true;
      if (ws.reason().code != websocket::close_code::none) code = static_cast<int>(ws.reason().code);
    }
    changed.notify_all();
  }
};

PilotClient::PilotClient(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  try {
    tcp::resolver resolver(impl_->ioc);
    const auto results = resolver.resolve(host, std::to_string(port));
    beast::get_lowest_layer(impl_->ws).connect(results);
    impl_->ws.handshake(host, "/");
  } catch (const boost::system::system_error& e) {
    throw std::runtime_error("pilot client: cannot connect to " + host + ":" + std::to_string(port) + ": " +
                             e.what());
  }
  impl_->ws.text(true);
  impl_->do_read();
  impl_->io = std::thread([impl = impl_.get()] { impl->ioc.run(); });
}

PilotClient::~PilotClient() {
  close();
  if (!wait_closed(std::chrono::milliseconds(500))) impl_->ioc.stop();
  impl_->io.join();
}

void PilotClient::send(const ClientMessage& message) { send_raw(to_json(message).dump()); }

void PilotClient::send_raw(const std::string& text) {
  auto payload = std::make_shared<const std::string>(text);
  net::post(impl_->ioc, [impl = impl_.get(), payload] {
    if (impl->closing) return;
    impl->outgoing.push_back(payload);
    if (!impl->writing) impl->do_write();
  });
}

std::optional<nlohmann::json> PilotClient::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  if (!impl_->changed.wait_for(lock, timeout, [&] { return !impl_->inbox.empty() || impl_->closed; }) ||
      impl_->inbox.empty()) {
    return std::nullopt;
  }
  nlohmann::json out = std::move(impl_->inbox.front());
  impl_->inbox.pop_front();
  return out;
}

std::optional<nlohmann::json> PilotClient::wait_for(const std::string& type, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    auto message = next(left);
    if (!message) return std::nullopt;
    if (message->is_object() && message->value("type", "") == type) return message;
  }
}

bool PilotClient::closed() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->closed;
}

std::optional<int> PilotClient::close_code() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->code;
}

bool PilotClient::wait_closed(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->mutex);
  return impl_->changed.wait_for(lock, timeout, [&] { return impl_->closed; });
}

void PilotClient::close() {
  net::post(impl_->ioc, [impl = impl_.get()] {
    if (impl->closing) return;
    impl->closing = true;
    {
      std::lock_guard lock(impl->mutex);
      if (impl->closed) return;
    }
    if (!impl->writing) impl->do_close();
  });
}

}  // namespace acsim::gateway
