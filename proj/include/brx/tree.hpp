#pragma once

// CART decision trees over the binary observation features.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "brx/env.hpp"
#include "brx/features.hpp"

namespace brx::tree {

using env::Action;
using env::FeatureVector;
using env::Role;

using ClassCounts = std::array<std::uint64_t, env::kActionCount>;

struct Node {
  enum class Kind : std::uint8_t { Internal, Leaf };

  Kind kind = Kind::Leaf;
  // Internal
  int feature = -1;
  int false_child = -1;
  int true_child = -1;
  // Leaf
  Action action = Action::NoOp;
  ClassCounts class_counts{};

  bool is_leaf() const { return kind == Kind::Leaf; }

  static Node internal(int feature, int false_child, int true_child) {
    Node n;
    n.kind = Kind::Internal;
    n.feature = feature;
    n.false_child = false_child;
    n.true_child = true_child;
    return n;
  }
  static Node leaf(Action action, ClassCounts counts = {}) {
    Node n;
    n.action = action;
    n.class_counts = counts;
    return n;
  }

  friend bool operator==(const Node&, const Node&) = default;
};

// Arena-backed binary tree. Construction validates the structure: every node
// reachable exactly once from the root, no feature repeated on a root-to-leaf
// path, and no leaf deeper than max_depth.
class DecisionTree {
public:
  DecisionTree(std::vector<Node> nodes, int root, Role role, int max_depth,
               int feature_schema_version = env::kFeatureSchemaVersion);

  static DecisionTree single_leaf(Role role, Action action);

  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  Role role() const { return role_; }
  int max_depth() const { return max_depth_; }
  int feature_schema_version() const { return schema_version_; }

  // Depth of the deepest leaf (0 for a single leaf).
  int depth() const;
  int leaf_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
  void validate() const;

  std::vector<Node> nodes_;
  int root_;
  Role role_;
  int max_depth_;
  int schema_version_;
};

// Descends from the root taking the true child iff the tested bit is set.
// Throws SchemaMismatchError when the versions differ.
Action tree_predict(const DecisionTree& tree, const FeatureVector& f);

struct Dataset {
  Role role = Role::Engineer;
  int schema_version = env::kFeatureSchemaVersion;
  std::vector<std::pair<FeatureVector, Action>> rows;

  void add(const FeatureVector& f, Action a) { rows.emplace_back(f, a); }
  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

// Greedy top-down induction minimising weighted Gini impurity. Splits are
// compared exactly in integer arithmetic; ties go to the lowest feature
// index. Leaves take the majority action, ties to the lowest enum value.
DecisionTree fit_tree(const Dataset& data, int max_depth, int min_samples_leaf);

// Gini impurity 1 - sum p_k^2 of a class histogram; 0 for an empty one.
double gini(const ClassCounts& counts);

// Majority action, ties to the lowest enum value.
Action majority_action(const ClassCounts& counts);

}  // namespace brx::tree
