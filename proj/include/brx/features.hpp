#pragma once

#include <bitset>
#include <cstddef>

#include "brx/env.hpp"

namespace brx::env {

inline constexpr int kAttributesPerRoom = 5;
inline constexpr int kFeatureCount = kRooms * kAttributesPerRoom;
inline constexpr int kFeatureSchemaVersion = 1;

enum class Attribute : std::uint8_t { Explored, Rubble, Victim, MedicHere, EngineerHere };

std::string_view to_string(Attribute a);

struct FeatureVector {
  std::bitset<kFeatureCount> bits;
  int schema_version = kFeatureSchemaVersion;

  bool test(int feature) const { return bits.test(static_cast<std::size_t>(feature)); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct FeatureDescriptor {
  RoomCoord room;
  Attribute attribute = Attribute::Explored;

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

// index = room_index * 5 + attribute
constexpr int feature_index(RoomCoord room, Attribute attribute) {
  return room_index(room) * kAttributesPerRoom + static_cast<int>(attribute);
}

// Throws std::out_of_range outside [0, kFeatureCount).
FeatureDescriptor feature_descriptor(int index);

FeatureVector encode_features(const Observation& obs);

// Inverse of encode_features. Throws FormatError when the vector does not
// carry exactly one medic and one engineer position.
Observation decode_features(const FeatureVector& f);

}  // namespace brx::env
