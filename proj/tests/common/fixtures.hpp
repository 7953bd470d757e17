#pragma once

// Golden DIS fixtures: .bin files produced by an independent DIS
// implementation, with the field values in a .json sidecar.

#include <fstream>
#include <iterator>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "acsim/dis/codec.hpp"
#include "support.hpp"

namespace acsim::test {

struct Fixture {
  std::string name;
  dis::Bytes bytes;
  nlohmann::json fields;
};

inline Fixture load_fixture(const std::string& name) {
  const auto dir = source_path("fixtures/dis");
  std::ifstream bin(dir / (name + ".bin"), std::ios::binary);
  std::ifstream side(dir / (name + ".json"));
  if (!bin || !side) throw std::runtime_error("missing fixture " + name);
  Fixture f;
  f.name = name;
  f.bytes.assign(std::istreambuf_iterator<char>(bin), {});
  f.fields = nlohmann::json::parse(side);
  return f;
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"entity_state_zero", "entity_state_f16", "entity_state_red",
                                                 "action_full_throttle", "action_sample"};
  return names;
}

inline dis::EntityId id_from(const nlohmann::json& j) {
  return {j[0].get<std::uint16_t>(), j[1].get<std::uint16_t>(), j[2].get<std::uint16_t>()};
}

// Builds the PDU the sidecar describes.
inline dis::Pdu pdu_from_fields(const nlohmann::json& f) {
  if (f.at("kind") == "entity_state") {
    dis::EntityStatePdu p;
    p.header.exercise_id = f.at("exercise_id").get<std::uint8_t>();
    p.header.timestamp = f.at("timestamp").get<std::uint32_t>();
    p.entity_id = id_from(f.at("entity_id"));
    p.force_id = f.at("force_id").get<std::uint8_t>();
    const auto& t = f.at("entity_type");
    p.entity_type = {t[0].get<std::uint8_t>(), t[1].get<std::uint8_t>(), t[2].get<std::uint16_t>(),
                     t[3].get<std::uint8_t>(), t[4].get<std::uint8_t>(), t[5].get<std::uint8_t>(),
                     t[6].get<std::uint8_t>()};
    for (int i = 0; i < 3; ++i) {
      p.location[i] = f.at("location")[i].get<double>();
      p.orientation[i] = f.at("orientation")[i].get<float>();
      p.linear_velocity[i] = f.at("linear_velocity")[i].get<float>();
    }
    p.dead_reckoning_algorithm = f.at("dead_reckoning_algorithm").get<std::uint8_t>();
    p.marking = f.at("marking").get<std::string>();
    p.marking_character_set = p.marking.empty() ? 0 : 1;
    p.appearance = f.at("appearance").get<std::uint32_t>();
    p.capabilities = f.at("capabilities").get<std::uint32_t>();
    return p;
  }
  dis::ActionDataPdu p;
  p.header.exercise_id = f.at("exercise_id").get<std::uint8_t>();
  p.header.timestamp = f.at("timestamp").get<std::uint32_t>();
  p.originator = id_from(f.at("originator"));
  p.entity_id = id_from(f.at("entity_id"));
  p.request_id = f.at("request_id").get<std::uint32_t>();
  p.throttle = f.at("throttle").get<float>();
  p.pitch_cmd = f.at("pitch").get<float>();
  p.roll_cmd = f.at("roll").get<float>();
  p.fire = f.at("fire").get<int>() != 0;
  return p;
}

}  // namespace acsim::test
