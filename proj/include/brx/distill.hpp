#pragma once

// DAgger distillation of a black-box policy into a decision tree, and
// action-match fidelity of a tree against its expert.

#include <memory>
#include <vector>

#include "brx/policies.hpp"
#include "brx/tree.hpp"

namespace brx::tree {

struct DistillConfig {
  int iterations = 5;
  int episodes_per_iteration = 400;
  int max_depth = 40;
  int min_samples_leaf = 2;
  // Episodes used to pick the best iterate.
  int holdout_episodes = 50;
  env::EnvConfig env;

  void validate() const;

  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

// Plays one role with a tree. A prediction that is illegal in the current
// observation is replaced by NoOp so learner rollouts never abort.
class TreePolicy final : public policy::Policy {
public:
  explicit TreePolicy(std::shared_ptr<const DecisionTree> tree) : tree_(std::move(tree)) {}

  Action act(const env::Observation& obs, Role role) const override;
  std::string name() const override { return "tree"; }

private:
  std::shared_ptr<const DecisionTree> tree_;
};

struct IterationStats {
  int iteration = 0;
  std::size_t dataset_rows = 0;
  int depth = 0;
  int leaves = 0;
  double holdout_fidelity = 0.0;
};

struct DistillResult {
  DecisionTree tree;
  std::vector<IterationStats> iterations;
  int best_iteration = 0;
  double best_fidelity = 0.0;
};

// Iteration 1 labels expert rollouts (behavior cloning). Later iterations
// roll out the current tree for `role` (the other agent stays expert), label
// every visited state with the expert's action, aggregate and refit. Returns
// the iterate with the highest hold-out fidelity, earliest on ties.
DistillResult dagger_distill(const policy::Policy& expert, Role role, const DistillConfig& cfg);

// Fraction of states, over `episodes` expert-pair rollouts seeded from
// env.seed, where the tree picks the expert's action for `role`.
double eval_fidelity(const DecisionTree& tree, const policy::Policy& expert, Role role,
                     int episodes, const env::EnvConfig& env);

// Seed streams, so training, hold-out and evaluation episodes never overlap.
inline constexpr std::uint64_t kHoldoutStream = 0x401dULL;
inline constexpr std::uint64_t kFidelityStream = 0xf1de11ULL;

}  // namespace brx::tree
