#include "acsim/gateway/protocol.hpp"

#include <cmath>

namespace acsim::gateway {

using nlohmann::json;

namespace {

constexpr const char* kBad = "bad-message";

double number_field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_number()) {
    throw ProtocolError(kBad, std::string("'") + key + "' must be a number");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ProtocolError(kBad, std::string("'") + key + "' must be finite");
  return v;
}

}  // namespace

ClientMessage parse_client_message(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    throw ProtocolError(kBad, "not JSON");
  }
  if (!doc.is_object()) throw ProtocolError(kBad, "expected an object");
  const auto type = doc.find("type");
  if (type == doc.end() || !type->is_string()) throw ProtocolError(kBad, "missing 'type'");
  const std::string kind = type->get<std::string>();

  if (kind == "join") {
    JoinMessage m;
    const auto team = doc.find("team");
    if (team == doc.end() || !team->is_string()) throw ProtocolError(kBad, "'team' must be a string");
    const auto parsed = combat::parse_team(team->get<std::string>());
    if (!parsed) throw ProtocolError(kBad, "'team' must be blue or red");
    m.team = *parsed;
    if (const auto e = doc.find("entity"); e != doc.end()) {
      if (!e->is_array() || e->size() != 3) throw ProtocolError(kBad, "'entity' must be [s,a,e]");
      combat::EntityId id;
      std::uint16_t* fields[3] = {&id.site, &id.application, &id.entity};
      for (int i = 0; i < 3; ++i) {
        if (!(*e)[i].is_number_unsigned() || (*e)[i].get<std::uint64_t>() > 0xFFFF) {
          throw ProtocolError(kBad, "'entity' fields must be integers in [0, 65535]");
        }
        *fields[i] = static_cast<std::uint16_t>((*e)[i].get<std::uint64_t>());
      }
      m.entity = id;
    }
    return m;
  }
  if (kind == "control") {
    ControlMessage m;
    m.command.control.throttle = clamp_unit(number_field(doc, "throttle"), 0.0, 1.0);
    m.command.control.pitch_cmd = clamp_unit(number_field(doc, "pitch"));
    m.command.control.roll_cmd = clamp_unit(number_field(doc, "roll"));
    const auto fire = doc.find("fire");
    if (fire == doc.end() || !fire->is_boolean()) throw ProtocolError(kBad, "'fire' must be a boolean");
    m.command.fire = fire->get<bool>();
    return m;
  }
  if (kind == "ping") return PingMessage{number_field(doc, "t")};
  if (kind == "leave") return LeaveMessage{};
  throw ProtocolError(kBad, "unknown type '" + kind + "'");
}

json joined_message(const combat::EntityId& entity) {
  return {{"type", "joined"}, {"entity", json::array({entity.site, entity.application, entity.entity})}};
}

json error_message(const std::string& code) { return {{"type", "error"}, {"code", code}}; }

json pong_message(double client_t, double server_t) {
  return {{"type", "pong"}, {"t", client_t}, {"server_t", server_t}};
}

json to_json(const ClientMessage& message) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, JoinMessage>) {
          json j{{"type", "join"}, {"team", combat::to_string(m.team)}};
          if (m.entity) j["entity"] = {m.entity->site, m.entity->application, m.entity->entity};
          return j;
        } else if constexpr (std::is_same_v<T, ControlMessage>) {
          return {{"type", "control"},
                  {"throttle", m.command.control.throttle},
                  {"pitch", m.command.control.pitch_cmd},
                  {"roll", m.command.control.roll_cmd},
                  {"fire", m.command.fire}};
        } else if constexpr (std::is_same_v<T, PingMessage>) {
          return {{"type", "ping"}, {"t", m.t}};
        } else {
          return {{"type", "leave"}};
        }
      },
      message);
}

}  // namespace acsim::gateway
