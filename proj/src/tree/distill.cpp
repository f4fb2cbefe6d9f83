#include "brx/distill.hpp"

#include "brx/errors.hpp"
#include "brx/random.hpp"

namespace brx::tree {

void DistillConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (episodes_per_iteration < 1) throw ConfigError("episodes_per_iteration must be at least 1");
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  if (holdout_episodes < 1) throw ConfigError("holdout_episodes must be at least 1");
  env.validate();
}

Action TreePolicy::act(const env::Observation& obs, Role role) const {
  const Action a = tree_predict(*tree_, env::encode_features(obs));
  return env::legal_actions(obs, role).contains(a) ? a : Action::NoOp;
}

namespace {

env::EnvConfig episode_config(const env::EnvConfig& base, std::uint64_t stream, int index) {
  env::EnvConfig cfg = base;
  cfg.seed = derive_seed(base.seed, stream, static_cast<std::uint64_t>(index));
  return cfg;
}

void collect(Dataset& data, const policy::Trajectory& traj, const policy::Policy& expert, Role role) {
  for (const auto& s : traj.steps) {
    data.add(env::encode_features(s.obs), expert.act(s.obs, role));
  }
}

}  // namespace

DistillResult dagger_distill(const policy::Policy& expert, Role role, const DistillConfig& cfg) {
  cfg.validate();
  Dataset data;
  data.role = role;

  std::optional<DistillResult> result;
  std::shared_ptr<const DecisionTree> current;
  std::vector<IterationStats> history;

  for (int it = 1; it <= cfg.iterations; ++it) {
    for (int e = 0; e < cfg.episodes_per_iteration; ++e) {
      const auto ep = episode_config(cfg.env, static_cast<std::uint64_t>(it), e);
      if (it == 1) {
        collect(data, policy::rollout(expert, expert, ep), expert, role);
      } else {
        TreePolicy learner(current);
        const auto traj = role == Role::Engineer ? policy::rollout(learner, expert, ep)
                                                 : policy::rollout(expert, learner, ep);
        collect(data, traj, expert, role);
      }
    }
    if (data.empty()) {
      throw EmptyDatasetError("distillation collected no states; check the environment config");
    }

    auto fitted = std::make_shared<const DecisionTree>(
        fit_tree(data, cfg.max_depth, cfg.min_samples_leaf));
    env::EnvConfig holdout = cfg.env;
    holdout.seed = derive_seed(cfg.env.seed, kHoldoutStream, 0);
    const double fid = eval_fidelity(*fitted, expert, role, cfg.holdout_episodes, holdout);
    history.push_back({it, data.size(), fitted->depth(), fitted->leaf_count(), fid});

    if (!result || fid > result->best_fidelity) {
      result = DistillResult{*fitted, {}, it, fid};
    }
    current = std::move(fitted);
  }
  result->iterations = std::move(history);
  return std::move(*result);
}

double eval_fidelity(const DecisionTree& tree, const policy::Policy& expert, Role role,
                     int episodes, const env::EnvConfig& env) {
  if (episodes < 1) throw ConfigError("fidelity needs at least one episode");
  std::uint64_t matches = 0;
  std::uint64_t total = 0;
  for (int e = 0; e < episodes; ++e) {
    const auto traj = policy::rollout(expert, expert, episode_config(env, kFidelityStream, e));
    for (const auto& s : traj.steps) {
      matches += tree_predict(tree, env::encode_features(s.obs)) == s.action(role) ? 1 : 0;
      ++total;
    }
  }
  // Episodes that start terminal contribute no states.
  return total == 0 ? 1.0 : static_cast<double>(matches) / static_cast<double>(total);
}

}  // namespace brx::tree
