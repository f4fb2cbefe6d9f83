#include "brx/tree.hpp"

#include <algorithm>
#include <bitset>
#include <numeric>
#include <unordered_map>

#include "brx/errors.hpp"

namespace brx::tree {

DecisionTree::DecisionTree(std::vector<Node> nodes, int root, Role role, int max_depth,
                           int feature_schema_version)
    : nodes_(std::move(nodes)),
      root_(root),
      role_(role),
      max_depth_(max_depth),
      schema_version_(feature_schema_version) {
  validate();
}

DecisionTree DecisionTree::single_leaf(Role role, Action action) {
  return DecisionTree({Node::leaf(action)}, 0, role, 0);
}

void DecisionTree::validate() const {
  if (max_depth_ < 0) throw FormatError("tree max_depth must be non-negative");
  const int n = static_cast<int>(nodes_.size());
  if (root_ < 0 || root_ >= n) throw FormatError("tree root id out of range");

  std::vector<bool> seen(nodes_.size(), false);
  std::bitset<env::kFeatureCount> on_path;

  // Explicit stack of (node, depth, entering?) so deep trees cannot overflow.
  struct Frame {
    int id;
    int depth;
    bool enter;
  };
  std::vector<Frame> stack{{root_, 0, true}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(f.id)];
    if (!f.enter) {
      on_path.reset(static_cast<std::size_t>(node.feature));
      continue;
    }
    if (seen[static_cast<std::size_t>(f.id)]) {
      throw FormatError("node " + std::to_string(f.id) + " reached more than once");
    }
    seen[static_cast<std::size_t>(f.id)] = true;
    if (f.depth > max_depth_) {
      throw FormatError("node " + std::to_string(f.id) + " lies below max_depth " +
                        std::to_string(max_depth_));
    }
    if (node.is_leaf()) {
      if (static_cast<int>(node.action) >= env::kActionCount) {
        throw FormatError("leaf " + std::to_string(f.id) + " has an invalid action");
      }
      continue;
    }
    if (node.feature < 0 || node.feature >= env::kFeatureCount) {
      throw FormatError("node " + std::to_string(f.id) + " tests an invalid feature");
    }
    if (on_path.test(static_cast<std::size_t>(node.feature))) {
      throw FormatError("feature " + std::to_string(node.feature) +
                        " repeated on a root-to-leaf path");
    }
    for (int child : {node.false_child, node.true_child}) {
      if (child < 0 || child >= n) {
        throw FormatError("node " + std::to_string(f.id) + " has a dangling child");
      }
    }
    on_path.set(static_cast<std::size_t>(node.feature));
    stack.push_back({f.id, f.depth, false});
    stack.push_back({node.true_child, f.depth + 1, true});
    stack.push_back({node.false_child, f.depth + 1, true});
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw FormatError("node " + std::to_string(i) + " is unreachable");
  }
}

int DecisionTree::depth() const {
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{root_, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf()) {
      deepest = std::max(deepest, d);
    } else {
      stack.emplace_back(node.false_child, d + 1);
      stack.emplace_back(node.true_child, d + 1);
    }
  }
  return deepest;
}

int DecisionTree::leaf_count() const {
  return static_cast<int>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

Action tree_predict(const DecisionTree& tree, const FeatureVector& f) {
  if (f.schema_version != tree.feature_schema_version()) {
    throw SchemaMismatchError("feature schema " + std::to_string(f.schema_version) +
                              " does not match tree schema " +
                              std::to_string(tree.feature_schema_version()));
  }
  const Node* node = &tree.node(tree.root());
  while (!node->is_leaf()) {
    node = &tree.node(f.test(node->feature) ? node->true_child : node->false_child);
  }
  return node->action;
}

double gini(const ClassCounts& counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (n == 0.0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / n;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

Action majority_action(const ClassCounts& counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return static_cast<Action>(best);
}

namespace {

using u128 = unsigned __int128;

struct UniqueRow {
  std::bitset<env::kFeatureCount> bits;
  ClassCounts counts{};
};

std::uint64_t total(const ClassCounts& c) {
  return std::accumulate(c.begin(), c.end(), std::uint64_t{0});
}

u128 sum_squares(const ClassCounts& c) {
  u128 s = 0;
  for (auto v : c) s += static_cast<u128>(v) * v;
  return s;
}

// Weighted Gini of a split is 1 - (A/nL + B/nR)/n with A, B the squared-count
// sums of each side, so minimising it maximises A/nL + B/nR. The score keeps
// that ratio as an exact fraction.
struct SplitScore {
  u128 numerator = 0;    // A*nR + B*nL
  u128 denominator = 1;  // nL*nR

  bool better_than(const SplitScore& other) const {
    return numerator * other.denominator > other.numerator * denominator;
  }
};

class Builder {
public:
  Builder(std::vector<UniqueRow> rows, int max_depth, int min_samples_leaf)
      : rows_(std::move(rows)), max_depth_(max_depth), min_leaf_(min_samples_leaf) {}

  std::vector<Node> build() {
    std::vector<int> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(nodes_);
  }

private:
  int grow(const std::vector<int>& members, int depth) {
    ClassCounts counts{};
    for (int r : members) {
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += rows_[static_cast<std::size_t>(r)].counts[k];
    }
    const std::uint64_t n = total(counts);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;

    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node::leaf(majority_action(counts), counts));
    if (pure || depth >= max_depth_ || n < 2 * static_cast<std::uint64_t>(min_leaf_)) {
      return id;
    }

    // Per-feature class histogram of rows with the bit set.
    std::vector<ClassCounts> on(env::kFeatureCount, ClassCounts{});
    for (int r : members) {
      const UniqueRow& row = rows_[static_cast<std::size_t>(r)];
      for (int f = 0; f < env::kFeatureCount; ++f) {
        if (!row.bits.test(static_cast<std::size_t>(f))) continue;
        auto& h = on[static_cast<std::size_t>(f)];
        for (std::size_t k = 0; k < h.size(); ++k) h[k] += row.counts[k];
      }
    }

    int best_feature = -1;
    SplitScore best;
    for (int f = 0; f < env::kFeatureCount; ++f) {
      const ClassCounts& right = on[static_cast<std::size_t>(f)];
      ClassCounts left{};
      for (std::size_t k = 0; k < left.size(); ++k) left[k] = counts[k] - right[k];
      const std::uint64_t n_right = total(right);
      const std::uint64_t n_left = n - n_right;
      if (n_left < static_cast<std::uint64_t>(min_leaf_) ||
          n_right < static_cast<std::uint64_t>(min_leaf_) || n_left == 0 || n_right == 0) {
        continue;
      }
      SplitScore s{sum_squares(left) * n_right + sum_squares(right) * n_left,
                   static_cast<u128>(n_left) * n_right};
      if (best_feature < 0 || s.better_than(best)) {
        best_feature = f;
        best = s;
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> false_rows;
    std::vector<int> true_rows;
    for (int r : members) {
      (rows_[static_cast<std::size_t>(r)].bits.test(static_cast<std::size_t>(best_feature)) ? true_rows
                                                                                          : false_rows)
          .push_back(r);
    }
    const int false_child = grow(false_rows, depth + 1);
    const int true_child = grow(true_rows, depth + 1);
    nodes_[static_cast<std::size_t>(id)] = Node::internal(best_feature, false_child, true_child);
    return id;
  }

  std::vector<UniqueRow> rows_;
  int max_depth_;
  int min_leaf_;
  std::vector<Node> nodes_;
};

}  // namespace

DecisionTree fit_tree(const Dataset& data, int max_depth, int min_samples_leaf) {
  if (data.empty()) throw EmptyDatasetError("cannot fit a tree to an empty dataset");
  if (max_depth < 0) throw ConfigError("max_depth must be non-negative");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");

  // Identical feature vectors collapse into one weighted row.
  std::unordered_map<std::bitset<env::kFeatureCount>, std::size_t> index;
  std::vector<UniqueRow> rows;
  for (const auto& [f, a] : data.rows) {
    if (f.schema_version != data.schema_version) {
      throw SchemaMismatchError("dataset mixes feature schema versions");
    }
    auto [it, inserted] = index.try_emplace(f.bits, rows.size());
    if (inserted) rows.push_back(UniqueRow{f.bits, {}});
    UniqueRow& row = rows[it->second];
    ++row.counts[static_cast<std::size_t>(a)];
  }

  Builder builder(std::move(rows), max_depth, min_samples_leaf);
  return DecisionTree(builder.build(), 0, data.role, max_depth, data.schema_version);
}

}  // namespace brx::tree
