#include <fstream>
#include <sstream>

#include "brx/errors.hpp"
#include "brx/hash.hpp"
#include "brx/llm_io.hpp"
#include "brx/service.hpp"

namespace brx::service {

namespace fs = std::filesystem;

json tree_artifact_to_json(const TreeArtifact& t) {
  return {{"format", "brx.tree_artifact"},
          {"version", 1},
          {"id", t.id},
          {"behavior", policy::to_string(t.behavior)},
          {"role", env::to_string(t.role)},
          {"config", t.config},
          {"best_iteration", t.best_iteration},
          {"holdout_fidelity", t.holdout_fidelity},
          {"fidelity", t.fidelity},
          {"fidelity_episodes", t.fidelity_episodes},
          {"fidelity_seed", t.fidelity_seed},
          {"depth", t.tree->depth()},
          {"leaves", t.tree->leaf_count()},
          {"tree", tree::tree_to_json(*t.tree)}};
}

TreeArtifact tree_artifact_from_json(const json& j) {
  try {
    if (j.at("format") != "brx.tree_artifact") throw FormatError("not a tree artifact");
    if (j.at("version") != 1) throw SchemaMismatchError("unsupported tree artifact version");
    TreeArtifact t;
    t.id = j.at("id").get<std::string>();
    t.behavior = policy::parse_behavior(j.at("behavior").get<std::string>());
    t.role = env::parse_role(j.at("role").get<std::string>());
    t.config = j.at("config").get<tree::DistillConfig>();
    t.best_iteration = j.at("best_iteration").get<int>();
    t.holdout_fidelity = j.at("holdout_fidelity").get<double>();
    t.fidelity = j.at("fidelity").get<double>();
    t.fidelity_episodes = j.at("fidelity_episodes").get<int>();
    t.fidelity_seed = j.at("fidelity_seed").get<std::uint64_t>();
    t.tree = std::make_shared<const tree::DecisionTree>(tree::tree_from_json(j.at("tree")));
    if (t.tree->role() != t.role) throw FormatError("tree role disagrees with its artifact");
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed tree artifact: ") + e.what());
  }
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
  for (const char* sub : {"trajectories", "trees", "explanations", "labels"}) {
    fs::create_directories(root_ / sub);
  }
}

fs::path ArtifactStore::path_for(const std::string& kind, const std::string& id, const char* ext) const {
  // Ids are generated here, but requests can carry arbitrary strings.
  if (id.empty() || id.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789-_") != std::string::npos) {
    throw ApiError(ApiCode::NotFound, "no " + kind + " artifact '" + id + "'");
  }
  return root_ / kind / (id + ext);
}

std::mutex& ArtifactStore::lock_for(const fs::path& path) {
  std::lock_guard lk(locks_mu_);
  auto& m = locks_[path.string()];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

void ArtifactStore::write_atomic(const fs::path& path, const std::string& content) {
  std::lock_guard lk(lock_for(path));
  const fs::path tmp = path.string() + ".tmp" + std::to_string(tmp_counter_++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string ArtifactStore::read_file(const fs::path& path, const std::string& what) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ApiError(ApiCode::NotFound, "no " + what + " '" + path.stem().string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> ArtifactStore::list_ids(const std::string& kind, const char* ext) const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(root_ / kind)) {
    if (e.is_regular_file() && e.path().extension() == ext) ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string ArtifactStore::put_trajectory(const policy::Trajectory& traj) {
  const std::string text = policy::trajectory_to_string(traj);
  const std::string id = content_id("ep", text);
  const auto path = path_for("trajectories", id, ".jsonl");
  if (!fs::exists(path)) write_atomic(path, text);
  return id;
}

policy::Trajectory ArtifactStore::get_trajectory(const std::string& id) const {
  return policy::trajectory_from_string(read_file(path_for("trajectories", id, ".jsonl"), "episode"));
}

std::vector<std::string> ArtifactStore::list_trajectories() const { return list_ids("trajectories", ".jsonl"); }

std::string ArtifactStore::put_tree(TreeArtifact artifact) {
  json key = tree::tree_to_json(*artifact.tree);
  key["behavior"] = policy::to_string(artifact.behavior);
  key["config"] = artifact.config;
  artifact.id = content_id("tree", canonical_dump(key));
  write_atomic(path_for("trees", artifact.id, ".json"), tree_artifact_to_json(artifact).dump(1));

  const fs::path active = root_ / "trees" / "active.json";
  std::lock_guard lk(active_mu_);
  json index = json::object();
  if (fs::exists(active)) index = json::parse(read_file(active, "tree index"));
  index[std::string(policy::to_string(artifact.behavior)) + "/" + std::string(env::to_string(artifact.role))] =
      artifact.id;
  write_atomic(active, index.dump(1));
  return artifact.id;
}

TreeArtifact ArtifactStore::get_tree(const std::string& id) const {
  if (id == "active") throw ApiError(ApiCode::NotFound, "no tree 'active'");
  return tree_artifact_from_json(json::parse(read_file(path_for("trees", id, ".json"), "tree")));
}

std::optional<TreeArtifact> ArtifactStore::active_tree(policy::Behavior b, env::Role r) const {
  const fs::path active = root_ / "trees" / "active.json";
  if (!fs::exists(active)) return std::nullopt;
  const json index = json::parse(read_file(active, "tree index"));
  const std::string key = std::string(policy::to_string(b)) + "/" + std::string(env::to_string(r));
  if (!index.contains(key)) return std::nullopt;
  return get_tree(index.at(key).get<std::string>());
}

std::vector<std::string> ArtifactStore::list_trees() const {
  auto ids = list_ids("trees", ".json");
  std::erase(ids, "active");
  return ids;
}

void ArtifactStore::put_explanation(const llm::ExplanationRecord& record) {
  write_atomic(path_for("explanations", record.id, ".json"), llm::record_to_json(record).dump(1));
}

llm::ExplanationRecord ArtifactStore::get_explanation(const std::string& id) const {
  return llm::record_from_json(json::parse(read_file(path_for("explanations", id, ".json"), "explanation")));
}

bool ArtifactStore::has_explanation(const std::string& id) const {
  try {
    return fs::exists(path_for("explanations", id, ".json"));
  } catch (const ApiError&) {
    return false;
  }
}

std::vector<std::string> ArtifactStore::list_explanations() const { return list_ids("explanations", ".json"); }

void ArtifactStore::put_labels(const eval::LabeledRecord& labels) {
  write_atomic(path_for("labels", labels.record_id, ".json"), json(labels).dump(1));
}

std::vector<eval::LabeledRecord> ArtifactStore::all_labels() const {
  std::vector<eval::LabeledRecord> out;
  for (const auto& id : list_ids("labels", ".json")) {
    out.push_back(json::parse(read_file(path_for("labels", id, ".json"), "labels")).get<eval::LabeledRecord>());
  }
  return out;
}

}  // namespace brx::service
