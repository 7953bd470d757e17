#include "acsim/gateway/server.hpp"

#include <atomic>
#include <deque>
#include <map>
#include <stdexcept>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "acsim/bounded_queue.hpp"
#include "acsim/dis/codec.hpp"
#include "acsim/gateway/protocol.hpp"

namespace acsim::gateway {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// DIS publishing

DisPublisher::DisPublisher(const dis::Geodetic& origin, bridge::BridgeMode mode, std::uint8_t exercise_id,
                           EntityId originator)
    : frame_(origin), mode_(mode), exercise_id_(exercise_id), originator_(originator) {}

std::vector<dis::Bytes> DisPublisher::datagrams(const combat::WorldState& world, const TickRecord& record) {
  std::vector<dis::Bytes> out;
  const std::uint32_t stamp = dis::relative_timestamp(world.time);
  if (mode_ == bridge::BridgeMode::kState) {
    for (const auto& [id, rec] : world.aircraft) {
      out.push_back(dis::encode(
          bridge::to_entity_state(id, rec.state, rec.team, rec.alive, frame_, exercise_id_, stamp)));
    }
  } else {
    for (const auto& [id, action] : record.actions) {
      out.push_back(dis::encode(bridge::to_action_data(originator_, id, bridge::quantize(action), exercise_id_,
                                                       stamp, ++request_id_)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Server

namespace {

struct Inbound {
  ClientId client = 0;
  std::variant<JoinMessage, ControlMessage, LeaveMessage> message;
  std::uint64_t received_at = 0;
};

using Text = std::shared_ptr<const std::string>;

}  // namespace

class Session;

struct GatewayServer::Impl {
  Impl(LiveSim& s, ServerOptions o)
      : sim(s), options(std::move(o)), acceptor(ioc), inbound(options.inbound_capacity) {}

  void do_accept();
  void on_message(const std::shared_ptr<Session>& session, const std::string& text);
  void on_disconnect(ClientId client);
  void send_to(ClientId client, const nlohmann::json& message);
  void broadcast(const nlohmann::json& message, bool droppable);
  void handle(const Inbound& in);

  LiveSim& sim;
  ServerOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor;
  std::map<ClientId, std::shared_ptr<Session>> sessions;  // I/O thread only
  BoundedQueue<Inbound> inbound;
  std::atomic<std::uint64_t> current_tick{0};
  std::atomic<std::size_t> open_sessions{0};
  ClientId next_client = 1;
  Clock::time_point started = Clock::now();

  std::atomic<std::uint64_t> connections{0}, messages_in{0}, protocol_errors{0}, inbound_dropped{0},
      snapshots_sent{0}, snapshots_dropped{0}, dis_sent{0}, dis_failed{0}, ticks{0};
};

class Session : public std::enable_shared_from_this<Session> {
 public:
  Session(tcp::socket&& socket, GatewayServer::Impl& server, ClientId id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  ClientId id() const { return id_; }

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->finish();
      self->server_.sessions[self->id_] = self;
      ++self->server_.open_sessions;
      ++self->server_.connections;
      self->do_read();
    });
  }

  // I/O thread only.
  void enqueue(const Text& text, bool droppable) {
    if (closing_ || close_after_) return;
    if (droppable && queue_.size() >= server_.options.send_queue) {
      ++server_.snapshots_dropped;
      return;
    }
    if (droppable) ++server_.snapshots_sent;
    queue_.push_back(text);
    if (!writing_) do_write();
  }

  // Closes once the queued messages are written.
  void close_after_flush(websocket::close_code code) {
    if (closing_ || close_after_) return;
    close_after_ = true;
    close_code_ = code;
    if (!writing_) do_close();
  }

 private:
  void do_read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_.on_message(self, text);
      if (!self->closing_) self->do_read();
    });
  }

  void do_write() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->finish();
      self->queue_.pop_front();
      if (!self->queue_.empty()) return self->do_write();
      self->writing_ = false;
      if (self->close_after_) self->do_close();
    });
  }

  void do_close() {
    closing_ = true;
    ws_.async_close(close_code_, [self = shared_from_this()](beast::error_code) { self->finish(); });
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    closing_ = true;
    queue_.clear();
    server_.on_disconnect(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  GatewayServer::Impl& server_;
  ClientId id_;
  std::deque<Text> queue_;
  bool writing_ = false;
  bool close_after_ = false;
  bool closing_ = false;
  bool finished_ = false;
  websocket::close_code close_code_ = websocket::close_code::normal;
};

void GatewayServer::Impl::do_accept() {
  acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Session>(std::move(socket), *this, next_client++)->start();
    do_accept();
  });
}

void GatewayServer::Impl::on_message(const std::shared_ptr<Session>& session, const std::string& text) {
  ++messages_in;
  ClientMessage message;
  try {
    message = parse_client_message(text);
  } catch (const ProtocolError& e) {
    ++protocol_errors;
    session->enqueue(std::make_shared<const std::string>(error_message(e.code()).dump()), false);
    session->close_after_flush(websocket::close_code::policy_error);
    return;
  }
  if (const auto* ping = std::get_if<PingMessage>(&message)) {
    const double now_ms = std::chrono::duration<double, std::milli>(Clock::now() - started).count();
    session->enqueue(std::make_shared<const std::string>(pong_message(ping->t, now_ms).dump()), false);
    return;
  }
  Inbound in;
  in.client = session->id();
  in.received_at = current_tick.load();
  std::visit(
      [&](const auto& m) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, PingMessage>) in.message = m;
      },
      message);
  if (!inbound.try_push(std::move(in))) ++inbound_dropped;
}

void GatewayServer::Impl::on_disconnect(ClientId client) {
  if (sessions.erase(client) > 0) --open_sessions;
  if (!inbound.try_push(Inbound{client, LeaveMessage{}, current_tick.load()})) ++inbound_dropped;
}

void GatewayServer::Impl::send_to(ClientId client, const nlohmann::json& message) {
  auto text = std::make_shared<const std::string>(message.dump());
  net::post(ioc, [this, client, text] {
    const auto it = sessions.find(client);
    if (it != sessions.end()) it->second->enqueue(text, false);
  });
}

void GatewayServer::Impl::broadcast(const nlohmann::json& message, bool droppable) {
  auto text = std::make_shared<const std::string>(message.dump());
  net::post(ioc, [this, text, droppable] {
    for (const auto& [id, session] : sessions) session->enqueue(text, droppable);
  });
}

void GatewayServer::Impl::handle(const Inbound& in) {
  if (const auto* join = std::get_if<JoinMessage>(&in.message)) {
    const auto result = sim.join(in.client, join->team, join->entity);
    if (const auto* id = std::get_if<EntityId>(&result)) {
      send_to(in.client, joined_message(*id));
    } else {
      send_to(in.client, error_message(std::get<JoinRejected>(result).code));
    }
  } else if (const auto* control = std::get_if<ControlMessage>(&in.message)) {
    if (!sim.set_input(in.client, control->command, in.received_at)) {
      send_to(in.client, error_message(error_code::kNotJoined));
    }
  } else {
    sim.leave(in.client);
  }
}

GatewayServer::GatewayServer(LiveSim& sim, ServerOptions options)
    : impl_(std::make_unique<Impl>(sim, std::move(options))) {
  if (!(impl_->options.time_scale > 0.0)) throw ContractViolation("GatewayServer: time_scale must be > 0");
  if (impl_->options.send_queue < 1) throw ContractViolation("GatewayServer: send_queue must be >= 1");
  try {
    const tcp::endpoint endpoint(net::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw std::runtime_error("gateway: cannot listen on " + impl_->options.address + ":" +
                             std::to_string(impl_->options.port) + ": " + e.what());
  }
}

GatewayServer::~GatewayServer() = default;

std::uint16_t GatewayServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void GatewayServer::run(std::stop_token stop) {
  Impl& s = *impl_;
  std::optional<bridge::UdpSocket> dis_socket;
  std::optional<DisPublisher> publisher;
  if (s.options.dis) {
    dis_socket.emplace(s.options.dis->listen, s.options.dis->broadcast);
    publisher.emplace(s.sim.scenario().origin, s.options.dis->mode, s.options.dis->exercise_id);
  }

  auto guard = net::make_work_guard(s.ioc);
  s.do_accept();
  std::jthread io([&s] { s.ioc.run(); });

  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(s.sim.decision_dt() / s.options.time_scale));
  auto next = Clock::now() + period;
  std::vector<Inbound> batch;
  while (!stop.stop_requested() && !s.sim.finished()) {
    s.inbound.wait_until(stop, next);
    batch.clear();
    s.inbound.drain(batch);
    for (const auto& in : batch) s.handle(in);
    if (Clock::now() < next) continue;

    const TickOutput out = s.sim.tick();
    s.current_tick = s.sim.ticks();
    ++s.ticks;
    if (out.snapshot) s.broadcast(*out.snapshot, true);
    if (publisher) {
      for (const auto& datagram : publisher->datagrams(s.sim.world(), out.record)) {
        if (dis_socket->send_to(datagram, s.options.dis->destination)) {
          ++s.dis_sent;
        } else {
          ++s.dis_failed;
        }
      }
    }
    next += period;
    if (Clock::now() - next > std::chrono::seconds(1)) next = Clock::now();
  }

  // A server stopped mid-episode closes with "going away" and sends no end.
  const bool finished = s.sim.finished();
  if (finished) s.broadcast(s.sim.end_message(), false);
  const auto code = finished ? websocket::close_code::normal : websocket::close_code::going_away;
  net::post(s.ioc, [&s, code] {
    beast::error_code ignored;
    s.acceptor.close(ignored);
    for (const auto& [id, session] : s.sessions) session->close_after_flush(code);
  });
  const auto deadline = Clock::now() + s.options.linger;
  while (s.open_sessions.load() > 0 && Clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  guard.reset();
  s.ioc.stop();
  io.join();
}

ServerStats GatewayServer::stats() const {
  const Impl& s = *impl_;
  ServerStats out;
  out.connections = s.connections;
  out.messages_in = s.messages_in;
  out.protocol_errors = s.protocol_errors;
  out.inbound_dropped = s.inbound_dropped;
  out.snapshots_sent = s.snapshots_sent;
  out.snapshots_dropped = s.snapshots_dropped;
  out.dis_sent = s.dis_sent;
  out.dis_failed = s.dis_failed;
  out.ticks = s.ticks;
  return out;
}

}  // namespace acsim::gateway
