#include "brx/errors.hpp"
#include "brx/eval.hpp"
#include "brx/features.hpp"
#include "brx/random.hpp"

namespace brx::eval {

const tree::DecisionTree& Surrogates::of(Role r) const {
  const auto& p = r == Role::Medic ? medic : engineer;
  if (!p) throw EvalError("no surrogate tree for the " + std::string(env::to_string(r)));
  return *p;
}

bool SampleResult::complete() const {
  for (const auto& [role, missing] : shortfall) {
    if (missing > 0) return false;
  }
  return true;
}

SampleResult sample_eval_states(const SampleRequest& req, const Surrogates& trees) {
  if (req.n_per_role < 1) throw EvalError("n_per_role must be at least 1");
  if (req.episode_budget < 1) throw EvalError("episode budget must be at least 1");
  req.env.validate();

  SampleResult result;
  std::map<Role, std::vector<EvalSample>> found;
  for (Role r : env::kRoles) result.shortfall[r] = req.n_per_role;

  // Goal categories do not apply to a pattern follower.
  if (req.behavior == Behavior::Fixed && req.category) return result;

  for (Role r : env::kRoles) {
    if (trees.of(r).role() != r) throw EvalError("surrogate tree role mismatch");
  }

  const auto expert = policy::make_policy(req.behavior);
  auto done = [&] {
    for (Role r : env::kRoles) {
      if (static_cast<int>(found[r].size()) < req.n_per_role) return false;
    }
    return true;
  };

  for (int e = 0; e < req.episode_budget && !done(); ++e) {
    env::EnvConfig cfg = req.env;
    cfg.seed = derive_seed(req.seed, kEvalStream, static_cast<std::uint64_t>(e));
    auto traj = std::make_shared<const policy::Trajectory>(policy::rollout(*expert, *expert, cfg));
    result.episodes_used = e + 1;
    Rng pick(derive_seed(cfg.seed, kEvalStream, 1));

    for (Role r : env::kRoles) {
      if (static_cast<int>(found[r].size()) >= req.n_per_role) continue;
      std::vector<EvalSample> pool;
      for (std::size_t t = 0; t < traj->size(); ++t) {
        const auto& s = traj->steps[t];
        const Action expert_action = s.action(r);
        const Action tree_action = tree::tree_predict(trees.of(r), env::encode_features(s.obs));
        if (tree_action != expert_action) continue;
        std::optional<StateCategory> cat;
        if (req.behavior != Behavior::Fixed) {
          try {
            cat = categorize_state(*traj, static_cast<int>(t), r);
          } catch (const EvalError&) {
            // Idle steps carry no target; they fit no category.
            if (req.category) continue;
          }
        }
        if (req.category && cat != req.category) continue;
        pool.push_back({traj, cfg.seed, static_cast<int>(t), r, cat, expert_action, tree_action});
      }
      if (pool.empty()) continue;
      found[r].push_back(pool[static_cast<std::size_t>(uniform_below(pick, pool.size()))]);
    }
  }

  for (Role r : {Role::Medic, Role::Engineer}) {
    result.shortfall[r] = req.n_per_role - static_cast<int>(found[r].size());
    for (auto& s : found[r]) result.samples.push_back(std::move(s));
  }
  return result;
}

}  // namespace brx::eval
