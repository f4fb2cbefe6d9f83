#pragma once

// JSON encodings for every persisted artifact. Field names follow the domain
// types; documents carry a "format" tag and an integer "version".

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "brx/distill.hpp"
#include "brx/env.hpp"
#include "brx/policies.hpp"
#include "brx/tree.hpp"

namespace brx {

using json = nlohmann::json;

inline constexpr int kTrajectoryFormatVersion = 1;
inline constexpr int kTreeFormatVersion = 1;

// Canonical single-line encoding (sorted keys) used for hashing and storage.
std::string canonical_dump(const json& j);

}  // namespace brx

namespace brx::env {

void to_json(json& j, const RoomCoord& c);
void from_json(const json& j, RoomCoord& c);
void to_json(json& j, const GroundTruthRoom& r);
void from_json(const json& j, GroundTruthRoom& r);
void to_json(json& j, const WorldState& w);
void from_json(const json& j, WorldState& w);
void to_json(json& j, const Observation& o);
void from_json(const json& j, Observation& o);
void to_json(json& j, const EnvConfig& c);
void from_json(const json& j, EnvConfig& c);

}  // namespace brx::env

namespace brx::policy {

void to_json(json& j, const Goal& g);
void from_json(const json& j, Goal& g);

// One header line, one line per timestep, one terminal line.
void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);
std::string trajectory_to_string(const Trajectory& traj);
Trajectory trajectory_from_string(const std::string& text);

}  // namespace brx::policy

namespace brx::tree {

json tree_to_json(const DecisionTree& tree);
// Rebuilds and validates every structural invariant; throws FormatError.
DecisionTree tree_from_json(const json& j);

void to_json(json& j, const DistillConfig& c);
void from_json(const json& j, DistillConfig& c);

}  // namespace brx::tree
