#pragma once

// Evaluation-state sampling, annotation labels, accuracy tables and the
// correlation statistic.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "brx/category.hpp"
#include "brx/io.hpp"
#include "brx/policies.hpp"
#include "brx/repr.hpp"
#include "brx/tree.hpp"

namespace brx::eval {

using env::Action;
using env::Role;
using policy::Behavior;

// Explore and Exploit agree at obs but disagree at next_obs.
bool is_ambiguous(const env::Observation& obs, const env::Observation& next_obs, Role role);

// Observation after `role` takes the shared Explore/Exploit action at step t
// while the other agent repeats its recorded action.
env::Observation next_observation_on_common_action(const policy::Trajectory& traj, int t, Role role);

// Requires 0 <= t < traj.size(). Ambiguous is tested first and needs no goal;
// otherwise the recorded goal decides between ShortTerm and LongTerm. Throws
// EvalError when the goal is missing or is not a target (pattern, idle).
StateCategory categorize_state(const policy::Trajectory& traj, int t, Role role);

// Whether `action` taken from `from` completes `goal` this step. A move that
// lands on the target room counts for every targeted goal.
bool achieves_goal(const policy::Goal& goal, env::RoomCoord from, Action action);

struct Surrogates {
  std::shared_ptr<const tree::DecisionTree> medic;
  std::shared_ptr<const tree::DecisionTree> engineer;

  const tree::DecisionTree& of(Role r) const;
};

struct EvalSample {
  std::shared_ptr<const policy::Trajectory> trajectory;
  std::uint64_t episode_seed = 0;
  int t = 0;
  Role role = Role::Engineer;
  std::optional<StateCategory> category;
  Action expert_action = Action::NoOp;
  Action tree_action = Action::NoOp;
};

struct SampleRequest {
  Behavior behavior = Behavior::Explore;
  std::optional<StateCategory> category;
  int n_per_role = 10;
  std::uint64_t seed = 0;
  int episode_budget = 500;
  env::EnvConfig env;
};

struct SampleResult {
  std::vector<EvalSample> samples;  // medic samples first, then engineer
  int episodes_used = 0;
  std::map<Role, int> shortfall;  // requested minus found, per role

  bool complete() const;
};

inline constexpr std::uint64_t kEvalStream = 0xe7a1ULL;

// Fresh rollouts with both agents on the behavior's expert, seeds
// derive_seed(seed, kEvalStream, episode). Each episode contributes at most
// one state per role, drawn uniformly from that role's qualifying steps
// (gated, and in the requested category when one is given). Stops once both
// roles have n states or the budget runs out.
SampleResult sample_eval_states(const SampleRequest& req, const Surrogates& trees);

enum class Metric : std::uint8_t { Strategy, Category, Goal, Action, Intent };

inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::Strategy, Metric::Category, Metric::Goal,
                                                      Metric::Action, Metric::Intent};

std::string_view to_string(Metric m);    // "strategy", ...
std::string_view display_name(Metric m); // "Strategy", ...

struct AnnotationLabels {
  std::optional<bool> strategy;
  std::optional<bool> category;
  std::optional<bool> goal;
  std::optional<bool> action;
  std::optional<bool> intent;
  std::optional<bool> hallucination_in_explanation;
  std::optional<bool> hallucination_in_prediction;
  std::string annotator_id;

  std::optional<bool> metric(Metric m) const;
  friend bool operator==(const AnnotationLabels&, const AnnotationLabels&) = default;
};

struct LabeledRecord {
  std::string record_id;
  Behavior behavior = Behavior::Explore;
  repr::BrKind br_kind = repr::BrKind::Path;
  std::optional<StateCategory> category;
  Role role = Role::Engineer;
  AnnotationLabels labels;

  friend bool operator==(const LabeledRecord&, const LabeledRecord&) = default;
};

// Metrics reported per behavior: Strategy/Action/Intent for Fixed, all five
// otherwise.
std::vector<Metric> metrics_for(Behavior b);

struct EvalCell {
  Behavior behavior = Behavior::Explore;
  repr::BrKind br_kind = repr::BrKind::Path;
  std::optional<StateCategory> category;  // unset for Fixed
  Metric metric = Metric::Strategy;
  int numerator = 0;
  int denominator = 0;

  double accuracy() const { return static_cast<double>(numerator) / denominator; }
};

// One cell per (behavior, br_kind, category, metric) holding at least one set
// label; empty cells are absent. Explore/Exploit records without a category
// are skipped. Ordered by behavior, br_kind, category, metric.
std::vector<EvalCell> score_cells(const std::vector<LabeledRecord>& records);

struct HallucinationRate {
  Behavior behavior = Behavior::Explore;
  repr::BrKind br_kind = repr::BrKind::Path;
  int explanation_flags = 0;
  int explanation_labeled = 0;
  int prediction_flags = 0;
  int prediction_labeled = 0;
};

// Per (behavior, br_kind) with at least one hallucination label.
std::vector<HallucinationRate> hallucination_rates(const std::vector<LabeledRecord>& records);

struct PearsonResult {
  double r = 0.0;
  double t = 0.0;
  double p = 1.0;  // two-sided
  int n = 0;

  bool significant(double alpha = 0.05) const { return p < alpha; }
};

// Sample Pearson correlation with the t-test on n - 2 degrees of freedom.
// Throws EvalError on length mismatch, n < 3 or a constant input.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// Rendered reports. Text tables are column-aligned, "-" marks an absent cell.
std::string explanation_table(const std::vector<EvalCell>& cells);  // Explore/Exploit: Strategy, Category, Goal
std::string prediction_table(const std::vector<EvalCell>& cells);   // Explore/Exploit: Action, Intent
std::string fixed_table(const std::vector<EvalCell>& cells);        // Fixed: Strategy, Action, Intent
std::string hallucination_table(const std::vector<HallucinationRate>& rates);

json cells_to_json(const std::vector<EvalCell>& cells);
json rates_to_json(const std::vector<HallucinationRate>& rates);

// Correlation between per-cell explanation hallucination rates and per-cell
// Action/Intent accuracy, over Explore/Exploit cells that have both.
struct CorrelationReport {
  std::optional<PearsonResult> action;
  std::optional<PearsonResult> intent;
  int cells = 0;
};

CorrelationReport hallucination_correlation(const std::vector<LabeledRecord>& records);
std::string correlation_text(const CorrelationReport& c);
json correlation_to_json(const CorrelationReport& c);

// Label file lines: {"record_id", "annotator_id", metric booleans,
// "hallucination_in_explanation", "hallucination_in_prediction"} plus the
// cell keys "behavior", "br_kind", "state_category", "role".
void to_json(json& j, const AnnotationLabels& l);
void from_json(const json& j, AnnotationLabels& l);
void to_json(json& j, const LabeledRecord& r);
void from_json(const json& j, LabeledRecord& r);

std::vector<LabeledRecord> read_labels(std::istream& in);
void write_labels(std::ostream& out, const std::vector<LabeledRecord>& records);

}  // namespace brx::eval
