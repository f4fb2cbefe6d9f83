#include <cstdio>
#include <istream>

#include "brx/errors.hpp"
#include "brx/features.hpp"
#include "brx/hash.hpp"
#include "brx/llm_io.hpp"
#include "brx/service.hpp"

namespace brx::service {

std::string_view to_string(ApiCode c) {
  switch (c) {
    case ApiCode::NotFound: return "NotFound";
    case ApiCode::Invalid: return "Invalid";
    case ApiCode::Gated: return "Gated";
    case ApiCode::BackendUnavailable: return "BackendUnavailable";
    case ApiCode::Conflict: return "Conflict";
  }
  return "?";
}

int http_status(ApiCode c) {
  switch (c) {
    case ApiCode::NotFound: return 404;
    case ApiCode::Invalid: return 400;
    case ApiCode::Gated: return 422;
    case ApiCode::BackendUnavailable: return 502;
    case ApiCode::Conflict: return 409;
  }
  return 500;
}

int exit_status(ApiCode c) {
  switch (c) {
    case ApiCode::NotFound: return 4;
    case ApiCode::Invalid: return 2;
    case ApiCode::Gated: return 3;
    case ApiCode::BackendUnavailable: return 5;
    case ApiCode::Conflict: return 6;
  }
  return 1;
}

ApiError to_api_error(const std::exception& e) {
  if (const auto* api = dynamic_cast<const ApiError*>(&e)) return *api;
  if (dynamic_cast<const GatingError*>(&e)) return {ApiCode::Gated, e.what()};
  if (dynamic_cast<const BackendError*>(&e)) return {ApiCode::BackendUnavailable, e.what()};
  return {ApiCode::Invalid, e.what()};
}

WorkbenchConfig WorkbenchConfig::from_json(const json& j) {
  WorkbenchConfig c;
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    env::EnvConfig env = j.contains("env") ? j.at("env").get<env::EnvConfig>() : env::EnvConfig{};
    if (j.contains("distill")) {
      json d = j.at("distill");
      if (!d.contains("env")) d["env"] = env;
      c.distill = d.get<tree::DistillConfig>();
    } else {
      c.distill.env = env;
    }
    c.fidelity_episodes = j.value("fidelity_episodes", c.fidelity_episodes);
    c.states_k = j.value("states_k", c.states_k);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration: ") + e.what());
  }
  c.distill.validate();
  if (c.fidelity_episodes < 1) throw ConfigError("fidelity_episodes must be at least 1");
  if (c.states_k < 1) throw ConfigError("states_k must be at least 1");
  return c;
}

Workbench::Workbench(std::shared_ptr<ArtifactStore> store, WorkbenchConfig config,
                     std::shared_ptr<llm::LlmBackend> offline, std::shared_ptr<llm::LlmBackend> live)
    : store_(std::move(store)), config_(std::move(config)), offline_(std::move(offline)), live_(std::move(live)) {
  if (!offline_) offline_ = std::make_shared<llm::MockBackend>();
}

llm::LlmBackend& Workbench::backend(bool live) {
  if (!live) return *offline_;
  if (!live_) {
    throw ApiError(ApiCode::BackendUnavailable, "no live LLM backend configured (set BRX_LLM_ENDPOINT)");
  }
  return *live_;
}

std::mutex& Workbench::record_lock(const std::string& id) {
  std::lock_guard lk(record_locks_mu_);
  auto& m = record_locks_[id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

std::vector<std::string> Workbench::rollout(policy::Behavior behavior, std::uint64_t seed, int episodes) {
  if (episodes < 1) throw ApiError(ApiCode::Invalid, "episodes must be at least 1");
  const auto expert = policy::make_policy(behavior);
  std::vector<std::string> ids;
  for (int e = 0; e < episodes; ++e) {
    env::EnvConfig cfg = config_.distill.env;
    cfg.seed = seed + static_cast<std::uint64_t>(e);
    ids.push_back(store_->put_trajectory(policy::rollout(*expert, *expert, cfg)));
  }
  return ids;
}

TreeArtifact Workbench::distill(policy::Behavior behavior, env::Role role) {
  return distill(behavior, role, config_.distill, config_.fidelity_episodes);
}

TreeArtifact Workbench::distill(policy::Behavior behavior, env::Role role, const tree::DistillConfig& cfg,
                                int fidelity_episodes) {
  cfg.validate();
  if (fidelity_episodes < 1) throw ApiError(ApiCode::Invalid, "fidelity episodes must be at least 1");
  const auto expert = policy::make_policy(behavior);
  auto result = tree::dagger_distill(*expert, role, cfg);

  TreeArtifact a;
  a.behavior = behavior;
  a.role = role;
  a.tree = std::make_shared<const tree::DecisionTree>(std::move(result.tree));
  a.config = cfg;
  a.best_iteration = result.best_iteration;
  a.holdout_fidelity = result.best_fidelity;
  a.fidelity_episodes = fidelity_episodes;
  a.fidelity_seed = cfg.env.seed;
  a.fidelity = tree::eval_fidelity(*a.tree, *expert, role, fidelity_episodes, cfg.env);
  a.id = store_->put_tree(a);
  return a;
}

TreeArtifact Workbench::tree_for(policy::Behavior behavior, env::Role role) {
  std::lock_guard lk(distill_mu_);
  if (auto t = store_->active_tree(behavior, role)) return *t;
  return distill(behavior, role);
}

llm::ExplanationRecord Workbench::explain(const ExplainRequest& req) {
  const auto traj = store_->get_trajectory(req.trajectory_id);
  if (req.t < 0 || static_cast<std::size_t>(req.t) >= traj.size()) {
    throw ApiError(ApiCode::Invalid, "t = " + std::to_string(req.t) + " is outside the episode (0.." +
                                         std::to_string(static_cast<long>(traj.size()) - 1) + ")");
  }
  const auto behavior = policy::parse_behavior(traj.policy_name(req.role));
  const TreeArtifact tree = tree_for(behavior, req.role);

  const json key{{"trajectory_id", req.trajectory_id}, {"t", req.t},
                 {"role", env::to_string(req.role)},   {"br_kind", repr::to_string(req.br_kind)},
                 {"live", req.live},                   {"predict", req.predict},
                 {"tree_id", tree.id},                 {"states_k", config_.states_k}};
  const std::string id = content_id("exp", canonical_dump(key));

  std::lock_guard lk(record_lock(id));
  if (store_->has_explanation(id)) return store_->get_explanation(id);

  const auto& step = traj.steps[static_cast<std::size_t>(req.t)];
  llm::ExplanationRecord r;
  r.id = id;
  r.trajectory_id = req.trajectory_id;
  r.t = req.t;
  r.behavior = behavior;
  r.role = req.role;
  r.br_kind = req.br_kind;
  r.observation = step.obs;
  r.action = step.action(req.role);
  r.tree_action = tree::tree_predict(*tree.tree, env::encode_features(step.obs));
  r.gated = r.tree_action == r.action;
  r.live = req.live;
  if (!r.gated) {
    throw GatingError("surrogate predicts " + std::string(env::to_string(r.tree_action)) + " but the " +
                      std::string(env::to_string(req.role)) + " took " + std::string(env::to_string(r.action)) +
                      " at t = " + std::to_string(req.t) + "; no explanation is generated");
  }
  if (behavior != policy::Behavior::Fixed) {
    try {
      r.state_category = eval::categorize_state(traj, req.t, req.role);
    } catch (const EvalError&) {
      r.state_category.reset();
    }
  }

  switch (req.br_kind) {
    case repr::BrKind::Path:
      r.br = repr::PathBR{repr::extract_path(*tree.tree, env::encode_features(step.obs))};
      break;
    case repr::BrKind::States:
      r.br = repr::sample_states_br(traj, req.role, config_.states_k, sha256_u64(id));
      break;
    case repr::BrKind::None:
      r.br = repr::NoBR{};
      break;
  }
  r.prompt = llm::build_prompt(r.br, req.role, step.obs.position(req.role), r.action);
  r.prompt_text = r.prompt.full_text();
  r.session = llm::ChatSession(id, llm::utc_timestamp());

  auto& llm_backend = backend(req.live);
  llm::request_explanation(r, llm_backend);
  if (req.predict) llm::request_action_prediction(r, llm_backend);
  store_->put_explanation(r);
  return r;
}

std::string Workbench::chat(const std::string& record_id, const std::string& text) {
  if (text.empty()) throw ApiError(ApiCode::Invalid, "chat message is empty");
  std::unique_lock lk(record_lock(record_id), std::try_to_lock);
  if (!lk.owns_lock()) {
    throw ApiError(ApiCode::Conflict, "a chat turn for " + record_id + " is already in flight");
  }
  auto r = store_->get_explanation(record_id);
  std::string reply = llm::follow_up(r, text, backend(r.live));
  store_->put_explanation(r);
  return reply;
}

namespace {

eval::LabeledRecord keyed_labels(const llm::ExplanationRecord& r, eval::AnnotationLabels labels) {
  eval::LabeledRecord out;
  out.record_id = r.id;
  out.behavior = r.behavior;
  out.br_kind = r.br_kind;
  out.category = r.state_category;
  out.role = r.role;
  out.labels = std::move(labels);
  return out;
}

}  // namespace

eval::LabeledRecord Workbench::label(const std::string& record_id, eval::AnnotationLabels labels) {
  if (labels.annotator_id.empty()) throw ApiError(ApiCode::Invalid, "annotator_id is required");
  const auto out = keyed_labels(store_->get_explanation(record_id), std::move(labels));
  store_->put_labels(out);
  return out;
}

int Workbench::import_labels(std::istream& in) {
  std::vector<eval::LabeledRecord> pending;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("record_id").get<std::string>();
      if (store_->has_explanation(id)) {
        pending.push_back(keyed_labels(store_->get_explanation(id), j.get<eval::AnnotationLabels>()));
      } else {
        pending.push_back(j.get<eval::LabeledRecord>());
      }
    } catch (const json::exception& e) {
      throw ApiError(ApiCode::Invalid, "label line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw ApiError(ApiCode::Invalid, "label line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  // Validate the whole file before writing any of it.
  for (const auto& l : pending) store_->put_labels(l);
  return static_cast<int>(pending.size());
}

EvalRunResult Workbench::run_eval(const EvalRunRequest& req) {
  eval::SampleRequest sreq;
  sreq.behavior = req.behavior;
  sreq.category = req.category;
  sreq.n_per_role = req.n_per_role;
  sreq.seed = req.seed;
  sreq.episode_budget = req.episode_budget;
  sreq.env = config_.distill.env;

  eval::Surrogates trees;
  trees.medic = tree_for(req.behavior, env::Role::Medic).tree;
  trees.engineer = tree_for(req.behavior, env::Role::Engineer).tree;
  const auto samples = eval::sample_eval_states(sreq, trees);

  EvalRunResult out;
  out.episodes_used = samples.episodes_used;
  out.shortfall = samples.shortfall;
  for (const auto& s : samples.samples) {
    const std::string traj_id = store_->put_trajectory(*s.trajectory);
    for (repr::BrKind k : req.br_kinds) {
      ExplainRequest ereq{traj_id, s.t, s.role, k, req.live, true};
      const auto rec = explain(ereq);
      out.record_ids.push_back(rec.id);
      if (rec.prediction_text) {
        out.predictions += 1;
        out.parseable_predictions += rec.predicted_action ? 1 : 0;
      }
    }
  }
  return out;
}

json Workbench::accuracy_report() const {
  const auto cells = eval::score_cells(store_->all_labels());
  return {{"cells", eval::cells_to_json(cells)},
          {"tables",
           {{"explanation", eval::explanation_table(cells)},
            {"prediction", eval::prediction_table(cells)},
            {"fixed", eval::fixed_table(cells)}}}};
}

json Workbench::hallucination_report() const {
  const auto labels = store_->all_labels();
  const auto rates = eval::hallucination_rates(labels);
  const auto corr = eval::hallucination_correlation(labels);
  return {{"rates", eval::rates_to_json(rates)},
          {"table", eval::hallucination_table(rates)},
          {"correlation", eval::correlation_to_json(corr)},
          {"correlation_text", eval::correlation_text(corr)}};
}

json Workbench::fidelity_report() const {
  json rows = json::array();
  for (policy::Behavior b : policy::kAllBehaviors) {
    for (env::Role r : {env::Role::Medic, env::Role::Engineer}) {
      const auto t = store_->active_tree(b, r);
      if (!t) continue;
      rows.push_back({{"behavior", policy::to_string(b)},
                      {"role", env::to_string(r)},
                      {"tree_id", t->id},
                      {"fidelity", t->fidelity},
                      {"fidelity_episodes", t->fidelity_episodes},
                      {"holdout_fidelity", t->holdout_fidelity},
                      {"depth", t->tree->depth()},
                      {"leaves", t->tree->leaf_count()}});
    }
  }
  return rows;
}

std::string Workbench::report_text() const {
  std::string out = "Surrogate fidelity\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-9s %-9s %9s %9s %6s %7s\n", "Behavior", "Role", "Fidelity", "Episodes",
                "Depth", "Leaves");
  out += buf;
  for (const auto& row : fidelity_report()) {
    std::snprintf(buf, sizeof buf, "%-9s %-9s %9.4f %9d %6d %7d\n", row["behavior"].get<std::string>().c_str(),
                  row["role"].get<std::string>().c_str(), row["fidelity"].get<double>(),
                  row["fidelity_episodes"].get<int>(), row["depth"].get<int>(), row["leaves"].get<int>());
    out += buf;
  }
  const json acc = accuracy_report();
  const json hal = hallucination_report();
  out += "\n" + acc["tables"]["explanation"].get<std::string>();
  out += "\n" + acc["tables"]["prediction"].get<std::string>();
  out += "\n" + acc["tables"]["fixed"].get<std::string>();
  out += "\n" + hal["table"].get<std::string>();
  out += "\n" + hal["correlation_text"].get<std::string>();
  return out;
}

}  // namespace brx::service
