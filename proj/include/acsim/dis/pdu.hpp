#pragma once

// DIS v6 (IEEE 1278.1-1995/1998) PDU types exchanged by the bridge.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <variant>

namespace acsim::dis {

inline constexpr std::uint8_t kProtocolVersion = 6;
inline constexpr std::size_t kHeaderSize = 12;
inline constexpr std::size_t kEntityStateSize = 144;
inline constexpr std::size_t kActionDataSize = 64;
inline constexpr std::size_t kMarkingLength = 11;

// Variable datum id carrying the fixed 16-byte action record inside a Data PDU.
inline constexpr std::uint32_t kActionDatumId = 100001;

enum class PduType : std::uint8_t {
  kEntityState = 1,
  kFire = 2,
  kData = 20,
};

enum class ProtocolFamily : std::uint8_t {
  kEntityInformation = 1,
  kSimulationManagement = 5,
};

enum class ForceId : std::uint8_t {
  kOther = 0,
  kFriendly = 1,
  kOpposing = 2,
};

// Bits 3-4 of the platform appearance record: 3 = destroyed.
inline constexpr std::uint32_t kAppearanceDamageMask = 0x18;
inline constexpr std::uint32_t kAppearanceDestroyed = 0x18;

struct PduHeader {
  std::uint8_t protocol_version = kProtocolVersion;
  std::uint8_t exercise_id = 0;
  std::uint8_t pdu_type = 0;
  std::uint8_t protocol_family = 0;
  std::uint32_t timestamp = 0;
  std::uint16_t length = 0;
  std::uint16_t padding = 0;

  bool operator==(const PduHeader&) const = default;
};

struct EntityId {
  std::uint16_t site = 0;
  std::uint16_t application = 0;
  std::uint16_t entity = 0;

  auto operator<=>(const EntityId&) const = default;
};

std::string to_string(const EntityId& id);

struct EntityType {
  std::uint8_t kind = 0;
  std::uint8_t domain = 0;
  std::uint16_t country = 0;
  std::uint8_t category = 0;
  std::uint8_t subcategory = 0;
  std::uint8_t specific = 0;
  std::uint8_t extra = 0;

  bool operator==(const EntityType&) const = default;
};

// F-16 style air platform: kind 1 (platform), domain 2 (air), country 225.
inline constexpr EntityType kFighterType{1, 2, 225, 1, 3, 3, 0};

struct EntityStatePdu {
  PduHeader header{kProtocolVersion, 0, 1, 1, 0, kEntityStateSize, 0};
  EntityId entity_id;
  std::uint8_t force_id = 0;
  std::uint8_t articulation_count = 0;
  EntityType entity_type;
  EntityType alternative_entity_type;
  std::array<float, 3> linear_velocity{};  // ECEF m/s
  std::array<double, 3> location{};        // ECEF m
  std::array<float, 3> orientation{};      // psi, theta, phi (rad)
  std::uint32_t appearance = 0;
  std::uint8_t dead_reckoning_algorithm = 0;
  std::array<std::uint8_t, 15> dead_reckoning_parameters{};
  std::array<float, 3> linear_acceleration{};
  std::array<float, 3> angular_velocity{};
  std::uint8_t marking_character_set = 1;  // ASCII
  std::string marking;                     // at most 11 chars, no NUL
  std::uint32_t capabilities = 0;

  bool operator==(const EntityStatePdu&) const = default;
};

// One agent command carried as a single variable datum of a Data PDU.
struct ActionDataPdu {
  PduHeader header{kProtocolVersion, 0, 20, 5, 0, kActionDataSize, 0};
  EntityId originator;
  EntityId entity_id;  // the entity the command applies to
  std::uint32_t request_id = 0;
  float throttle = 0.0f;   // [0, 1]
  float pitch_cmd = 0.0f;  // [-1, 1]
  float roll_cmd = 0.0f;   // [-1, 1]
  bool fire = false;

  bool operator==(const ActionDataPdu&) const = default;
};

// A well-formed DIS v6 PDU this codec does not model.
struct UnsupportedPdu {
  std::uint8_t pdu_type = 0;
  std::string reason;

  bool operator==(const UnsupportedPdu&) const = default;
};

using Pdu = std::variant<EntityStatePdu, ActionDataPdu>;
using DecodedPdu = std::variant<EntityStatePdu, ActionDataPdu, UnsupportedPdu>;

// Dead reckoning algorithm ids (DRM).
inline constexpr std::uint8_t kDrmStatic = 1;
inline constexpr std::uint8_t kDrmFpw = 2;

}  // namespace acsim::dis
