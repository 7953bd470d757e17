#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acsim/dis/pdu.hpp"

namespace acsim::dis {

class EncodeError : public std::invalid_argument {
 public:
  EncodeError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class MalformedPacket : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;

// Big-endian IEEE 1278.1 layout. Throws EncodeError naming the first offending field.
Bytes encode(const EntityStatePdu& pdu);
Bytes encode(const ActionDataPdu& pdu);
Bytes encode(const Pdu& pdu);

// Accepts arbitrary bytes. Throws MalformedPacket for truncated buffers, foreign
// protocol versions and out-of-range payloads; well-formed PDUs of other types
// come back as UnsupportedPdu.
DecodedPdu decode(std::span<const std::uint8_t> bytes);

// Linear (DRM-FPW) extrapolation of the entity location. dt must be >= 0.
std::array<double, 3> dead_reckon(const EntityStatePdu& last, double dt);

// Relative DIS timestamp: units of 3600/2^31 s past the hour, low bit 0.
std::uint32_t relative_timestamp(double seconds);
double timestamp_seconds(std::uint32_t timestamp);

}  // namespace acsim::dis
