#pragma once

// File-backed artifact store, the workbench operations behind the CLI and the
// HTTP API, and the API error taxonomy.

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "brx/distill.hpp"
#include "brx/errors.hpp"
#include "brx/eval.hpp"
#include "brx/io.hpp"
#include "brx/llm.hpp"

namespace brx::service {

enum class ApiCode : std::uint8_t { NotFound, Invalid, Gated, BackendUnavailable, Conflict };

std::string_view to_string(ApiCode c);
int http_status(ApiCode c);  // 404, 400, 422, 502, 409
int exit_status(ApiCode c);  // 4, 2, 3, 5, 6

class ApiError : public Error {
public:
  ApiError(ApiCode code, const std::string& message) : Error(message), code_(code) {}
  ApiCode code() const noexcept { return code_; }

private:
  ApiCode code_;
};

// Maps any exception escaping a workbench call onto exactly one code.
ApiError to_api_error(const std::exception& e);

struct TreeArtifact {
  std::string id;
  policy::Behavior behavior = policy::Behavior::Explore;
  env::Role role = env::Role::Engineer;
  std::shared_ptr<const tree::DecisionTree> tree;
  tree::DistillConfig config;
  int best_iteration = 0;
  double holdout_fidelity = 0.0;
  double fidelity = 0.0;  // over fidelity_episodes fresh expert rollouts
  int fidelity_episodes = 0;
  std::uint64_t fidelity_seed = 0;
};

json tree_artifact_to_json(const TreeArtifact& t);
TreeArtifact tree_artifact_from_json(const json& j);

// Layout under root: trajectories/<id>.jsonl, trees/<id>.json,
// trees/active.json, explanations/<id>.json, labels/<record id>.json.
// Every write goes to a temp file that is renamed into place.
class ArtifactStore {
public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  std::string put_trajectory(const policy::Trajectory& traj);
  policy::Trajectory get_trajectory(const std::string& id) const;
  std::vector<std::string> list_trajectories() const;

  // Stores the tree and makes it the active one for its (behavior, role).
  std::string put_tree(TreeArtifact artifact);
  TreeArtifact get_tree(const std::string& id) const;
  std::optional<TreeArtifact> active_tree(policy::Behavior b, env::Role r) const;
  std::vector<std::string> list_trees() const;

  void put_explanation(const llm::ExplanationRecord& record);
  llm::ExplanationRecord get_explanation(const std::string& id) const;
  bool has_explanation(const std::string& id) const;
  std::vector<std::string> list_explanations() const;

  // Upsert keyed by record id.
  void put_labels(const eval::LabeledRecord& labels);
  std::vector<eval::LabeledRecord> all_labels() const;

private:
  std::filesystem::path path_for(const std::string& kind, const std::string& id, const char* ext) const;
  void write_atomic(const std::filesystem::path& path, const std::string& content);
  std::string read_file(const std::filesystem::path& path, const std::string& what) const;
  std::vector<std::string> list_ids(const std::string& kind, const char* ext) const;
  std::mutex& lock_for(const std::filesystem::path& path);

  std::filesystem::path root_;
  std::mutex locks_mu_;
  std::mutex active_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  std::atomic<std::uint64_t> tmp_counter_{0};
};

struct WorkbenchConfig {
  tree::DistillConfig distill;
  int fidelity_episodes = 1000;
  int states_k = repr::kDefaultStatesSample;

  // {"env": {...}, "distill": {...}, "fidelity_episodes": n, "states_k": k};
  // a missing "distill.env" inherits "env".
  static WorkbenchConfig from_json(const json& j);
};

struct ExplainRequest {
  std::string trajectory_id;
  int t = 0;
  env::Role role = env::Role::Engineer;
  repr::BrKind br_kind = repr::BrKind::Path;
  bool live = false;
  bool predict = true;  // also ask for the next-action prediction
};

struct EvalRunRequest {
  policy::Behavior behavior = policy::Behavior::Explore;
  std::optional<StateCategory> category;
  int n_per_role = 10;
  std::uint64_t seed = 0;
  int episode_budget = 500;
  std::vector<repr::BrKind> br_kinds = {repr::kAllBrKinds.begin(), repr::kAllBrKinds.end()};
  bool live = false;
};

struct EvalRunResult {
  std::vector<std::string> record_ids;
  int episodes_used = 0;
  std::map<env::Role, int> shortfall;
  int parseable_predictions = 0;
  int predictions = 0;
};

class Workbench {
public:
  // `live` may be null; live requests then fail with BackendUnavailable.
  Workbench(std::shared_ptr<ArtifactStore> store, WorkbenchConfig config,
            std::shared_ptr<llm::LlmBackend> offline, std::shared_ptr<llm::LlmBackend> live);

  ArtifactStore& store() { return *store_; }
  const WorkbenchConfig& config() const { return config_; }

  // Episode e uses env seed `seed + e`.
  std::vector<std::string> rollout(policy::Behavior behavior, std::uint64_t seed, int episodes);

  TreeArtifact distill(policy::Behavior behavior, env::Role role);
  TreeArtifact distill(policy::Behavior behavior, env::Role role, const tree::DistillConfig& cfg,
                       int fidelity_episodes);
  // Active tree, distilled with the default configuration when missing.
  TreeArtifact tree_for(policy::Behavior behavior, env::Role role);

  // Content-addressed by the request; repeating a request returns the stored
  // record. Non-gated states raise GatingError and store nothing.
  llm::ExplanationRecord explain(const ExplainRequest& req);

  // One turn at a time per record; a concurrent turn gets Conflict.
  std::string chat(const std::string& record_id, const std::string& text);

  eval::LabeledRecord label(const std::string& record_id, eval::AnnotationLabels labels);
  // Lines naming a stored record take their cell keys from it.
  int import_labels(std::istream& in);

  EvalRunResult run_eval(const EvalRunRequest& req);

  json accuracy_report() const;
  json hallucination_report() const;
  json fidelity_report() const;
  std::string report_text() const;

private:
  llm::LlmBackend& backend(bool live);

  std::shared_ptr<ArtifactStore> store_;
  WorkbenchConfig config_;
  std::shared_ptr<llm::LlmBackend> offline_;
  std::shared_ptr<llm::LlmBackend> live_;

  std::mutex& record_lock(const std::string& id);

  std::mutex distill_mu_;
  std::mutex record_locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> record_locks_;
};

enum class JobStatus : std::uint8_t { Queued, Running, Done, Failed };
std::string_view to_string(JobStatus s);

struct JobInfo {
  std::string id;
  std::string kind;
  JobStatus status = JobStatus::Queued;
  json result;
  std::optional<ApiError> error;
};

// Fixed-size worker pool for long-running requests.
class JobQueue {
public:
  explicit JobQueue(int workers);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(std::string kind, std::function<json()> work);
  std::optional<JobInfo> get(const std::string& id) const;
  // Blocks until the job leaves Queued/Running.
  JobInfo wait(const std::string& id) const;

private:
  void run();

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<std::pair<std::string, std::function<json()>>> pending_;
  std::map<std::string, JobInfo> jobs_;
  std::uint64_t next_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  int workers = 2;
};

// HTTP/1.1 JSON API over a workbench.
class HttpService {
public:
  HttpService(std::shared_ptr<Workbench> bench, ServerOptions options);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace brx::service
