#include "acsim/dis/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "acsim/core.hpp"

namespace acsim::dis {

std::string to_string(const EntityId& id) {
  return std::to_string(id.site) + ":" + std::to_string(id.application) + ":" +
         std::to_string(id.entity);
}

namespace {

class Writer {
 public:
  explicit Writer(std::size_t size) { out_.reserve(size); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v >> 32));
    u32(static_cast<std::uint32_t>(v));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void header(const PduHeader& h) {
    u8(h.protocol_version);
    u8(h.exercise_id);
    u8(h.pdu_type);
    u8(h.protocol_family);
    u32(h.timestamp);
    u16(h.length);
    u16(h.padding);
  }
  void entity_id(const EntityId& id) {
    u16(id.site);
    u16(id.application);
    u16(id.entity);
  }
  void entity_type(const EntityType& t) {
    u8(t.kind);
    u8(t.domain);
    u16(t.country);
    u8(t.category);
    u8(t.subcategory);
    u8(t.specific);
    u8(t.extra);
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    if (pos_ >= in_.size()) throw MalformedPacket("unexpected end of PDU");
    return in_[pos_++];
  }
  std::uint16_t u16() {
    const auto hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }
  std::uint64_t u64() {
    const std::uint64_t hi = u32();
    return (hi << 32) | u32();
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  PduHeader header() {
    PduHeader h;
    h.protocol_version = u8();
    h.exercise_id = u8();
    h.pdu_type = u8();
    h.protocol_family = u8();
    h.timestamp = u32();
    h.length = u16();
    h.padding = u16();
    return h;
  }
  EntityId entity_id() {
    EntityId id;
    id.site = u16();
    id.application = u16();
    id.entity = u16();
    return id;
  }
  EntityType entity_type() {
    EntityType t;
    t.kind = u8();
    t.domain = u8();
    t.country = u16();
    t.category = u8();
    t.subcategory = u8();
    t.specific = u8();
    t.extra = u8();
    return t;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void check_header(const PduHeader& h, PduType type, ProtocolFamily family, std::size_t size) {
  if (h.protocol_version != kProtocolVersion) {
    throw EncodeError("header.protocol_version", "only DIS v6 is supported");
  }
  if (h.pdu_type != static_cast<std::uint8_t>(type)) {
    throw EncodeError("header.pdu_type", "inconsistent with body variant");
  }
  if (h.protocol_family != static_cast<std::uint8_t>(family)) {
    throw EncodeError("header.protocol_family", "inconsistent with body variant");
  }
  if (h.length != size) {
    throw EncodeError("header.length", "must equal encoded size " + std::to_string(size));
  }
  if (h.padding != 0) throw EncodeError("header.padding", "must be zero");
}

template <typename T, std::size_t N>
void check_finite(const std::array<T, N>& v, const char* field) {
  for (const auto x : v) {
    if (!std::isfinite(x)) throw EncodeError(field, "non-finite component");
  }
}

void check_range(float v, float lo, float hi, const char* field) {
  if (!(v >= lo && v <= hi)) {
    throw EncodeError(field, "outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

bool in_range(float v, float lo, float hi) { return v >= lo && v <= hi; }

EntityStatePdu decode_entity_state(const PduHeader& header, Reader& r) {
  EntityStatePdu pdu;
  pdu.header = header;
  pdu.entity_id = r.entity_id();
  pdu.force_id = r.u8();
  pdu.articulation_count = r.u8();
  pdu.entity_type = r.entity_type();
  pdu.alternative_entity_type = r.entity_type();
  for (auto& v : pdu.linear_velocity) v = r.f32();
  for (auto& v : pdu.location) v = r.f64();
  for (auto& v : pdu.orientation) v = r.f32();
  pdu.appearance = r.u32();
  pdu.dead_reckoning_algorithm = r.u8();
  for (auto& v : pdu.dead_reckoning_parameters) v = r.u8();
  for (auto& v : pdu.linear_acceleration) v = r.f32();
  for (auto& v : pdu.angular_velocity) v = r.f32();
  pdu.marking_character_set = r.u8();
  char marking[kMarkingLength];
  for (auto& c : marking) c = static_cast<char>(r.u8());
  pdu.marking.assign(marking, strnlen(marking, kMarkingLength));
  pdu.capabilities = r.u32();
  for (const auto x : pdu.orientation) {
    if (!std::isfinite(x)) throw MalformedPacket("non-finite orientation");
  }
  return pdu;
}

}  // namespace

Bytes encode(const EntityStatePdu& pdu) {
  check_header(pdu.header, PduType::kEntityState, ProtocolFamily::kEntityInformation,
               kEntityStateSize);
  if (pdu.articulation_count != 0) {
    throw EncodeError("articulation_count", "articulation parameters are not supported");
  }
  check_finite(pdu.location, "location");
  check_finite(pdu.orientation, "orientation");
  check_finite(pdu.linear_velocity, "linear_velocity");
  check_finite(pdu.linear_acceleration, "linear_acceleration");
  check_finite(pdu.angular_velocity, "angular_velocity");
  if (pdu.marking.size() > kMarkingLength) {
    throw EncodeError("marking", "longer than 11 characters");
  }
  if (pdu.marking.find('\0') != std::string::npos) {
    throw EncodeError("marking", "embedded NUL");
  }

  Writer w(kEntityStateSize);
  w.header(pdu.header);
  w.entity_id(pdu.entity_id);
  w.u8(pdu.force_id);
  w.u8(pdu.articulation_count);
  w.entity_type(pdu.entity_type);
  w.entity_type(pdu.alternative_entity_type);
  for (const auto v : pdu.linear_velocity) w.f32(v);
  for (const auto v : pdu.location) w.f64(v);
  for (const auto v : pdu.orientation) w.f32(v);
  w.u32(pdu.appearance);
  w.u8(pdu.dead_reckoning_algorithm);
  for (const auto v : pdu.dead_reckoning_parameters) w.u8(v);
  for (const auto v : pdu.linear_acceleration) w.f32(v);
  for (const auto v : pdu.angular_velocity) w.f32(v);
  w.u8(pdu.marking_character_set);
  for (std::size_t i = 0; i < kMarkingLength; ++i) {
    w.u8(i < pdu.marking.size() ? static_cast<std::uint8_t>(pdu.marking[i]) : 0);
  }
  w.u32(pdu.capabilities);
  return w.take();
}

Bytes encode(const ActionDataPdu& pdu) {
  check_header(pdu.header, PduType::kData, ProtocolFamily::kSimulationManagement,
               kActionDataSize);
  check_range(pdu.throttle, 0.0f, 1.0f, "throttle");
  check_range(pdu.pitch_cmd, -1.0f, 1.0f, "pitch_cmd");
  check_range(pdu.roll_cmd, -1.0f, 1.0f, "roll_cmd");

  Writer w(kActionDataSize);
  w.header(pdu.header);
  w.entity_id(pdu.originator);
  w.entity_id(pdu.entity_id);
  w.u32(pdu.request_id);
  w.u32(0);  // padding
  w.u32(0);  // fixed datum records
  w.u32(1);  // variable datum records
  w.u32(kActionDatumId);
  w.u32(16 * 8);  // datum length in bits
  w.f32(pdu.throttle);
  w.f32(pdu.pitch_cmd);
  w.f32(pdu.roll_cmd);
  w.u32(pdu.fire ? 1 : 0);
  return w.take();
}

Bytes encode(const Pdu& pdu) {
  return std::visit([](const auto& p) { return encode(p); }, pdu);
}

DecodedPdu decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw MalformedPacket("truncated header");
  Reader r(bytes);
  const PduHeader header = r.header();
  if (header.protocol_version != kProtocolVersion) {
    throw MalformedPacket("unsupported protocol version " +
                          std::to_string(header.protocol_version));
  }
  if (header.length < kHeaderSize) throw MalformedPacket("declared length below header size");
  if (header.length > bytes.size()) throw MalformedPacket("truncated PDU");
  if (header.padding != 0) throw MalformedPacket("nonzero header padding");
  Reader body(bytes.first(header.length));
  body.header();

  switch (header.pdu_type) {
    case static_cast<std::uint8_t>(PduType::kEntityState): {
      if (header.length < 20) throw MalformedPacket("truncated entity state");
      if (bytes[19] != 0) return UnsupportedPdu{header.pdu_type, "articulation parameters"};
      if (header.length != kEntityStateSize) {
        throw MalformedPacket("entity state length " + std::to_string(header.length));
      }
      if (header.protocol_family != static_cast<std::uint8_t>(ProtocolFamily::kEntityInformation)) {
        throw MalformedPacket("entity state with wrong protocol family");
      }
      return decode_entity_state(header, body);
    }
    case static_cast<std::uint8_t>(PduType::kData): {
      ActionDataPdu pdu;
      pdu.header = header;
      pdu.originator = body.entity_id();
      pdu.entity_id = body.entity_id();
      pdu.request_id = body.u32();
      body.u32();
      const auto fixed_count = body.u32();
      const auto variable_count = body.u32();
      if (fixed_count != 0 || variable_count != 1 || header.length != kActionDataSize) {
        return UnsupportedPdu{header.pdu_type, "data PDU without action record"};
      }
      const auto datum_id = body.u32();
      const auto datum_bits = body.u32();
      if (datum_id != kActionDatumId || datum_bits != 128) {
        return UnsupportedPdu{header.pdu_type, "data PDU without action record"};
      }
      if (header.protocol_family != static_cast<std::uint8_t>(ProtocolFamily::kSimulationManagement)) {
        throw MalformedPacket("data PDU with wrong protocol family");
      }
      pdu.throttle = body.f32();
      pdu.pitch_cmd = body.f32();
      pdu.roll_cmd = body.f32();
      const auto fire = body.u32();
      if (fire > 1) throw MalformedPacket("action fire flag not 0/1");
      pdu.fire = fire == 1;
      if (!in_range(pdu.throttle, 0.0f, 1.0f) || !in_range(pdu.pitch_cmd, -1.0f, 1.0f) ||
          !in_range(pdu.roll_cmd, -1.0f, 1.0f)) {
        throw MalformedPacket("action command out of range");
      }
      return pdu;
    }
    default:
      return UnsupportedPdu{header.pdu_type, "pdu type " + std::to_string(header.pdu_type)};
  }
}

std::array<double, 3> dead_reckon(const EntityStatePdu& last, double dt) {
  if (!(dt >= 0.0)) throw ContractViolation("dead_reckon: dt must be >= 0");
  std::array<double, 3> out = last.location;
  for (std::size_t i = 0; i < 3; ++i) {
    out[i] += static_cast<double>(last.linear_velocity[i]) * dt;
  }
  return out;
}

std::uint32_t relative_timestamp(double seconds) {
  constexpr double kUnitsPerSecond = 2147483648.0 / 3600.0;
  double past_hour = std::fmod(seconds, 3600.0);
  if (past_hour < 0.0) past_hour += 3600.0;
  auto units = static_cast<std::uint64_t>(past_hour * kUnitsPerSecond);
  if (units > 0x7FFFFFFFULL) units = 0x7FFFFFFFULL;
  return static_cast<std::uint32_t>(units << 1);
}

double timestamp_seconds(std::uint32_t timestamp) {
  return static_cast<double>(timestamp >> 1) * 3600.0 / 2147483648.0;
}

}  // namespace acsim::dis
