#include "brx/features.hpp"

#include <stdexcept>

#include "brx/errors.hpp"

namespace brx::env {

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::Explored: return "explored";
    case Attribute::Rubble: return "rubble";
    case Attribute::Victim: return "victim";
    case Attribute::MedicHere: return "medic_here";
    case Attribute::EngineerHere: return "engineer_here";
  }
  return "?";
}

FeatureDescriptor feature_descriptor(int index) {
  if (index < 0 || index >= kFeatureCount) {
    throw std::out_of_range("feature index " + std::to_string(index) + " outside [0, " +
                            std::to_string(kFeatureCount) + ")");
  }
  return {room_at(index / kAttributesPerRoom),
          static_cast<Attribute>(index % kAttributesPerRoom)};
}

FeatureVector encode_features(const Observation& obs) {
  FeatureVector f;
  for (int i = 0; i < kRooms; ++i) {
    const RoomCoord c = room_at(i);
    const auto idx = static_cast<std::size_t>(i);
    f.bits.set(static_cast<std::size_t>(feature_index(c, Attribute::Explored)), obs.explored[idx]);
    f.bits.set(static_cast<std::size_t>(feature_index(c, Attribute::Rubble)), obs.known_rubble[idx]);
    f.bits.set(static_cast<std::size_t>(feature_index(c, Attribute::Victim)), obs.known_victim[idx]);
  }
  f.bits.set(static_cast<std::size_t>(feature_index(obs.medic_pos, Attribute::MedicHere)));
  f.bits.set(static_cast<std::size_t>(feature_index(obs.engineer_pos, Attribute::EngineerHere)));
  return f;
}

Observation decode_features(const FeatureVector& f) {
  if (f.schema_version != kFeatureSchemaVersion) {
    throw SchemaMismatchError("feature schema version " + std::to_string(f.schema_version) +
                              " is not " + std::to_string(kFeatureSchemaVersion));
  }
  Observation obs;
  int medics = 0;
  int engineers = 0;
  for (int i = 0; i < kRooms; ++i) {
    const RoomCoord c = room_at(i);
    const auto idx = static_cast<std::size_t>(i);
    obs.explored[idx] = f.test(feature_index(c, Attribute::Explored));
    obs.known_rubble[idx] = f.test(feature_index(c, Attribute::Rubble));
    obs.known_victim[idx] = f.test(feature_index(c, Attribute::Victim));
    if (f.test(feature_index(c, Attribute::MedicHere))) {
      obs.medic_pos = c;
      ++medics;
    }
    if (f.test(feature_index(c, Attribute::EngineerHere))) {
      obs.engineer_pos = c;
      ++engineers;
    }
  }
  if (medics != 1 || engineers != 1) {
    throw FormatError("feature vector must place exactly one medic and one engineer");
  }
  return obs;
}

}  // namespace brx::env
