#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include "brx/distill.hpp"
#include "brx/env.hpp"
#include "brx/features.hpp"
#include "brx/policies.hpp"
#include "brx/random.hpp"

namespace brx::test {

inline std::filesystem::path golden_dir() { return BRX_GOLDEN_DIR; }

inline std::string read_golden(const std::string& name) {
  std::ifstream in(golden_dir() / name, std::ios::binary);
  if (!in) throw std::runtime_error("missing golden file " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline env::RoomCoord random_room(Rng& rng) {
  return env::room_at(static_cast<int>(uniform_below(rng, env::kRooms)));
}

// Observation satisfying the shared-memory rules, with arbitrary contents.
inline env::Observation random_observation(Rng& rng) {
  env::Observation obs;
  for (int i = 0; i < env::kRooms; ++i) {
    obs.explored[i] = uniform_below(rng, 2) == 1;
    if (!obs.explored[i]) continue;
    const auto roll = uniform_below(rng, 4);
    obs.known_rubble[i] = roll == 0;
    obs.known_victim[i] = roll == 1;
  }
  obs.medic_pos = random_room(rng);
  obs.engineer_pos = random_room(rng);
  obs.explored[env::room_index(obs.medic_pos)] = true;
  obs.explored[env::room_index(obs.engineer_pos)] = true;
  return obs;
}

// Observation that explored only the listed rooms.
inline env::Observation make_obs(std::initializer_list<env::RoomCoord> explored,
                                 std::initializer_list<env::RoomCoord> rubble,
                                 std::initializer_list<env::RoomCoord> victims,
                                 env::RoomCoord medic, env::RoomCoord engineer) {
  env::Observation obs;
  for (auto c : explored) obs.explored[env::room_index(c)] = true;
  for (auto c : rubble) obs.known_rubble[env::room_index(c)] = true;
  for (auto c : victims) obs.known_victim[env::room_index(c)] = true;
  obs.medic_pos = medic;
  obs.engineer_pos = engineer;
  obs.explored[env::room_index(medic)] = true;
  obs.explored[env::room_index(engineer)] = true;
  return obs;
}

inline env::WorldState empty_world(env::RoomCoord medic, env::RoomCoord engineer) {
  env::WorldState w;
  w.medic_pos = medic;
  w.engineer_pos = engineer;
  w.explored[env::room_index(medic)] = true;
  w.explored[env::room_index(engineer)] = true;
  return w;
}

// Default-configuration trees, distilled once per test process.
inline std::shared_ptr<const tree::DecisionTree> default_tree(policy::Behavior b, env::Role r) {
  static std::mutex mu;
  static std::map<std::pair<policy::Behavior, env::Role>, std::shared_ptr<const tree::DecisionTree>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{b, r}];
  if (!slot) {
    const auto expert = policy::make_policy(b);
    slot = std::make_shared<const tree::DecisionTree>(
        tree::dagger_distill(*expert, r, tree::DistillConfig{}).tree);
  }
  return slot;
}

}  // namespace brx::test

#include <atomic>
#include <chrono>
#include <thread>
#include <unistd.h>

#include "brx/llm.hpp"
#include "brx/service.hpp"

namespace brx::test {

// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("brx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

// Small distillation budget so service tests stay fast.
inline service::WorkbenchConfig quick_config() {
  service::WorkbenchConfig c;
  c.distill.iterations = 2;
  c.distill.episodes_per_iteration = 30;
  c.distill.holdout_episodes = 10;
  c.fidelity_episodes = 20;
  return c;
}

// Mock backend that counts calls and can stall each one.
class SlowMock final : public llm::LlmBackend {
public:
  explicit SlowMock(std::chrono::milliseconds delay = std::chrono::milliseconds(0)) : delay_(delay) {}
  std::string complete(const std::vector<llm::Message>& messages) override {
    ++calls;
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    return inner_.complete(messages);
  }
  llm::BackendMetadata metadata() const override { return inner_.metadata(); }
  std::atomic<int> calls{0};

private:
  std::chrono::milliseconds delay_;
  llm::MockBackend inner_;
};

// A (trajectory id, t, role) where the active tree disagrees with the expert.
struct UngatedState {
  std::string trajectory_id;
  int t = -1;
  env::Role role = env::Role::Engineer;
};

inline std::optional<UngatedState> find_ungated(service::Workbench& bench, policy::Behavior b, std::uint64_t seed,
                                                int episodes) {
  const auto ids = bench.rollout(b, seed, episodes);
  for (env::Role r : env::kRoles) {
    const auto tree = bench.tree_for(b, r).tree;
    for (const auto& id : ids) {
      const auto traj = bench.store().get_trajectory(id);
      for (std::size_t t = 0; t < traj.size(); ++t) {
        if (tree::tree_predict(*tree, env::encode_features(traj.steps[t].obs)) != traj.steps[t].action(r)) {
          return UngatedState{id, static_cast<int>(t), r};
        }
      }
    }
  }
  return std::nullopt;
}

// First gated state of the episode for the role.
inline int first_gated(service::Workbench& bench, const std::string& traj_id, env::Role r) {
  const auto traj = bench.store().get_trajectory(traj_id);
  const auto b = policy::parse_behavior(traj.policy_name(r));
  const auto tree = bench.tree_for(b, r).tree;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    if (tree::tree_predict(*tree, env::encode_features(traj.steps[t].obs)) == traj.steps[t].action(r)) {
      return static_cast<int>(t);
    }
  }
  return -1;
}

}  // namespace brx::test
