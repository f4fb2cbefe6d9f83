// Command-line driver: rollouts, distillation, explanations, chat, evaluation
// runs, label import, reports and the HTTP service.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "brx/llm_io.hpp"
#include "brx/service.hpp"

using namespace brx;
using service::ApiCode;
using service::ApiError;

namespace {

struct Globals {
  std::string store_dir;
  std::string config_path;
};

service::WorkbenchConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ApiError(ApiCode::NotFound, "cannot open configuration file " + path);
  try {
    return service::WorkbenchConfig::from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ApiError(ApiCode::Invalid, "configuration file " + path + ": " + e.what());
  }
}

std::shared_ptr<service::Workbench> open_bench(const Globals& g) {
  auto store = std::make_shared<service::ArtifactStore>(g.store_dir);
  std::shared_ptr<llm::LlmBackend> live;
  if (auto cfg = llm::HttpChatConfig::from_env()) live = std::make_shared<llm::HttpChatBackend>(*cfg);
  return std::make_shared<service::Workbench>(store, load_config(g.config_path),
                                              std::make_shared<llm::MockBackend>(), live);
}

template <typename T, typename Parse>
CLI::Validator enum_validator(Parse parse, const std::string& names) {
  return CLI::Validator(
      [parse](std::string& s) -> std::string {
        try {
          (void)parse(s);
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      },
      names);
}

void print_record(const llm::ExplanationRecord& r) {
  std::cout << "record " << r.id << "\n";
  std::cout << "state: episode " << r.trajectory_id << ", t = " << r.t << ", " << env::to_string(r.role) << ", "
            << policy::to_string(r.behavior);
  if (r.state_category) std::cout << ", " << display_name(*r.state_category);
  std::cout << "\naction: " << repr::render_action(r.role, r.observation.position(r.role), r.action) << "\n";
  std::cout << "representation: " << repr::display_name(r.br_kind) << "\n\n";
  std::cout << "Explanation:\n" << r.explanation_text.value_or("") << "\n";
  if (r.prediction_text) {
    std::cout << "\nPrediction:\n" << *r.prediction_text << "\n";
    std::cout << "(prediction " << (r.predicted_action ? "parsed" : "unparseable") << ")\n";
  }
}

std::atomic<service::HttpService*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-representation explanation workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  const char* env_store = std::getenv("BRX_STORE");
  g.store_dir = env_store && *env_store ? env_store : "brx-store";
  app.add_option("--store", g.store_dir, "Artifact store directory (env BRX_STORE)");
  app.add_option("--config", g.config_path, "JSON file with env/distill defaults")->check(CLI::ExistingFile);

  const std::string behaviors = "explore|exploit|fixed";
  std::string behavior_name, role_name, br_name = "path", category_name;
  std::uint64_t seed = 0;
  int episodes = 1;

  auto* rollout = app.add_subcommand("rollout", "Roll out expert episodes and store them");
  rollout->add_option("--behavior", behavior_name)->required()->check(
      enum_validator<policy::Behavior>(policy::parse_behavior, behaviors));
  rollout->add_option("--seed", seed, "Environment seed of the first episode");
  rollout->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);

  int fidelity_episodes = 0;
  auto* distill = app.add_subcommand("distill", "Distill a surrogate tree for one behavior and role");
  distill->add_option("--behavior", behavior_name)->required()->check(
      enum_validator<policy::Behavior>(policy::parse_behavior, behaviors));
  distill->add_option("--role", role_name)->required()->check(
      enum_validator<env::Role>(env::parse_role, "medic|engineer"));
  distill->add_option("--fidelity-episodes", fidelity_episodes, "Fresh episodes for the fidelity estimate")
      ->check(CLI::PositiveNumber);

  std::string trajectory_id;
  int t = 0;
  bool live = false, no_predict = false;
  auto* explain = app.add_subcommand("explain", "Explain one agent action");
  explain->add_option("--trajectory", trajectory_id, "Episode id")->required();
  explain->add_option("--t", t, "Timestep")->required();
  explain->add_option("--role", role_name)->required()->check(
      enum_validator<env::Role>(env::parse_role, "medic|engineer"));
  explain->add_option("--br", br_name, "path|states|none")->check(
      enum_validator<repr::BrKind>(repr::parse_br_kind, "path|states|none"));
  explain->add_flag("--live", live, "Use the configured LLM endpoint instead of the mock");
  explain->add_flag("--no-predict", no_predict, "Skip the next-action prediction follow-up");

  std::string record_id;
  std::vector<std::string> messages;
  auto* chat = app.add_subcommand("chat", "Follow-up questions about an explanation");
  chat->add_option("--record", record_id, "Explanation record id")->required();
  chat->add_option("--message,-m", messages, "Message(s) to send; reads stdin lines when omitted");

  int n_per_role = 10, budget = 500;
  std::vector<std::string> br_list;
  auto* evalc = app.add_subcommand("eval", "Sample gated states and explain them");
  evalc->add_option("--behavior", behavior_name)->required()->check(
      enum_validator<policy::Behavior>(policy::parse_behavior, behaviors));
  evalc->add_option("--category", category_name, "long_term|short_term|ambiguous")->check(
      enum_validator<StateCategory>(parse_category, "long_term|short_term|ambiguous"));
  evalc->add_option("--n", n_per_role, "States per role")->check(CLI::PositiveNumber);
  evalc->add_option("--seed", seed, "Sampling seed");
  evalc->add_option("--budget", budget, "Episode budget")->check(CLI::PositiveNumber);
  evalc->add_option("--br", br_list, "Representations to use (default: all)")->check(
      enum_validator<repr::BrKind>(repr::parse_br_kind, "path|states|none"));
  evalc->add_flag("--live", live, "Use the configured LLM endpoint instead of the mock");

  std::string label_file;
  auto* label = app.add_subcommand("label", "Annotation labels");
  auto* label_import = label->add_subcommand("import", "Import a label file (one JSON object per line)");
  label_import->add_option("file", label_file)->required()->check(CLI::ExistingFile);
  label->require_subcommand(1);

  bool as_json = false;
  auto* report = app.add_subcommand("report", "Fidelity, accuracy and hallucination tables");
  report->add_flag("--json", as_json, "Emit machine-readable records");

  service::ServerOptions server_opts;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", server_opts.port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", server_opts.host);
  serve->add_option("--workers", server_opts.workers, "Background job workers")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    auto bench = open_bench(g);
    if (*rollout) {
      for (const auto& id : bench->rollout(policy::parse_behavior(behavior_name), seed, episodes)) {
        std::cout << id << "\n";
      }
    } else if (*distill) {
      const int fid = fidelity_episodes > 0 ? fidelity_episodes : bench->config().fidelity_episodes;
      const auto a = bench->distill(policy::parse_behavior(behavior_name), env::parse_role(role_name),
                                    bench->config().distill, fid);
      std::printf("%s\nfidelity %.4f over %d episodes (hold-out %.4f, depth %d, %d leaves)\n", a.id.c_str(),
                  a.fidelity, a.fidelity_episodes, a.holdout_fidelity, a.tree->depth(), a.tree->leaf_count());
    } else if (*explain) {
      service::ExplainRequest req{trajectory_id, t, env::parse_role(role_name), repr::parse_br_kind(br_name), live,
                                  !no_predict};
      print_record(bench->explain(req));
    } else if (*chat) {
      auto send = [&](const std::string& text) { std::cout << bench->chat(record_id, text) << "\n"; };
      if (!messages.empty()) {
        for (const auto& m : messages) send(m);
      } else {
        std::string line;
        while (std::getline(std::cin, line)) {
          if (!line.empty()) send(line);
        }
      }
    } else if (*evalc) {
      service::EvalRunRequest req;
      req.behavior = policy::parse_behavior(behavior_name);
      if (!category_name.empty()) req.category = parse_category(category_name);
      req.n_per_role = n_per_role;
      req.seed = seed;
      req.episode_budget = budget;
      req.live = live;
      if (!br_list.empty()) {
        req.br_kinds.clear();
        for (const auto& b : br_list) req.br_kinds.push_back(repr::parse_br_kind(b));
      }
      const auto res = bench->run_eval(req);
      for (const auto& id : res.record_ids) std::cout << id << "\n";
      std::cerr << res.record_ids.size() << " records from " << res.episodes_used << " episodes; "
                << res.parseable_predictions << "/" << res.predictions << " predictions parsed\n";
      int missing = 0;
      for (const auto& [role, n] : res.shortfall) {
        if (n > 0) std::cerr << "shortfall: " << n << " " << env::to_string(role) << " state(s)\n";
        missing += n;
      }
      if (missing > 0) {
        throw ApiError(ApiCode::Invalid, "episode budget exhausted before enough qualifying states were found");
      }
    } else if (*label) {
      std::ifstream in(label_file);
      std::cout << bench->import_labels(in) << " label record(s) imported\n";
    } else if (*report) {
      if (as_json) {
        std::cout << json{{"fidelity", bench->fidelity_report()},
                          {"accuracy", bench->accuracy_report()},
                          {"hallucination", bench->hallucination_report()}}
                         .dump(1)
                  << "\n";
      } else {
        std::cout << bench->report_text();
      }
    } else if (*serve) {
      service::HttpService server(bench, server_opts);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving on " << server_opts.host << ":" << server_opts.port << " (store " << g.store_dir
                << ")\n";
      server.run();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    const ApiError api = service::to_api_error(e);
    std::cerr << "error [" << service::to_string(api.code()) << "]: " << api.what() << "\n";
    return service::exit_status(api.code());
  }
  return 0;
}
