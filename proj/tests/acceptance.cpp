// Acceptance harness: one PASS/FAIL line per primary criterion. Exit status
// is the number of failures. `--live` additionally runs the evaluation against
// the configured chat endpoint and writes a label template for annotators.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "brx/distill.hpp"
#include "brx/eval.hpp"
#include "brx/llm.hpp"
#include "brx/random.hpp"
#include "brx/service.hpp"
#include "support.hpp"

using namespace brx;
using env::Action;
using env::Role;
using policy::Behavior;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << "exception: " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.1fs", secs);
  std::cout << (c.ok ? "PASS " : "FAIL ") << name << ": " << c.detail.str() << timing << std::endl;
  if (!c.ok) ++failures;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

env::RoomCoord coord(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Two-pass centred-moment formula.
double pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

void run_live(service::Workbench& bench, const std::filesystem::path& out_dir) {
  const auto cfg = llm::HttpChatConfig::from_env();
  if (!cfg) {
    std::cout << "LIVE skipped: BRX_LLM_ENDPOINT is not set" << std::endl;
    return;
  }
  auto live = std::make_shared<llm::HttpChatBackend>(*cfg);
  service::Workbench live_bench(std::make_shared<service::ArtifactStore>(bench.store().root()), bench.config(),
                                std::make_shared<llm::MockBackend>(), live);
  std::vector<eval::LabeledRecord> templ;
  for (Behavior b : policy::kAllBehaviors) {
    const std::vector<std::optional<StateCategory>> cats =
        b == Behavior::Fixed ? std::vector<std::optional<StateCategory>>{std::nullopt}
                             : std::vector<std::optional<StateCategory>>{kAllCategories.begin(), kAllCategories.end()};
    for (const auto& cat : cats) {
      service::EvalRunRequest req;
      req.behavior = b;
      req.category = cat;
      req.seed = 2024;
      req.live = true;
      const auto res = live_bench.run_eval(req);
      std::cout << "LIVE " << policy::to_string(b) << (cat ? " " + std::string(to_string(*cat)) : std::string()) << ": "
                << res.record_ids.size() << " records, " << res.parseable_predictions << "/" << res.predictions
                << " predictions parsed" << std::endl;
      for (const auto& id : res.record_ids) {
        const auto r = live_bench.store().get_explanation(id);
        templ.push_back({id, r.behavior, r.br_kind, r.state_category, r.role, {}});
      }
    }
  }
  const auto path = out_dir / "label_template.jsonl";
  std::ofstream out(path);
  eval::write_labels(out, templ);
  std::cout << "LIVE label template: " << path.string() << " (" << templ.size()
            << " records); fill it in and run `brx label import` then `brx report`" << std::endl;
  std::cout << eval::explanation_table({}) << eval::prediction_table({}) << eval::fixed_table({});
}

}  // namespace

int main(int argc, char** argv) {
  bool live = false;
  for (int i = 1; i < argc; ++i) live = live || std::string(argv[i]) == "--live";

  // Default-configuration trees, shared by the checks below.
  std::map<std::pair<Behavior, Role>, tree::DecisionTree> trees;
  for (Behavior b : policy::kAllBehaviors) {
    const auto expert = policy::make_policy(b);
    for (Role r : env::kRoles) trees.emplace(std::pair{b, r}, tree::dagger_distill(*expert, r, {}).tree);
  }
  const env::EnvConfig env_cfg = tree::DistillConfig{}.env;

  report("fixed-fidelity", [&](Check& c) {
    const auto expert = policy::make_policy(Behavior::Fixed);
    for (Role r : env::kRoles) {
      const double f = tree::eval_fidelity(trees.at({Behavior::Fixed, r}), *expert, r, 5000, env_cfg);
      c.detail << env::to_string(r) << " " << fmt(f) << ", ";
      c.expect(f == 1.0, std::string(env::to_string(r)) + " below 1.00");
    }
    c.detail << "5000 episodes; ";
  });

  report("explore-exploit-fidelity", [&](Check& c) {
    for (Behavior b : {Behavior::Explore, Behavior::Exploit}) {
      const auto expert = policy::make_policy(b);
      for (Role r : env::kRoles) {
        const double f = tree::eval_fidelity(trees.at({b, r}), *expert, r, 5000, env_cfg);
        c.detail << policy::to_string(b) << "/" << env::to_string(r) << " " << fmt(f) << ", ";
        c.expect(f >= 0.85, std::string(policy::to_string(b)) + "/" + std::string(env::to_string(r)) + " below 0.85");
      }
    }
    c.detail << "5000 episodes; ";
  });

  report("path-faithfulness", [&](Check& c) {
    Rng rng(derive_seed(1, 0xfa17, 0));
    std::vector<const tree::DecisionTree*> all;
    for (const auto& [key, t] : trees) all.push_back(&t);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto& t = *all[uniform_below(rng, all.size())];
      const auto f = env::encode_features(test::random_observation(rng));
      const auto p = repr::extract_path(t, f);
      int id = t.root();
      bool ok = true;
      for (const auto& s : p.steps) {
        const auto& n = t.node(id);
        if (n.is_leaf() || s.feature != n.feature || s.branch != f.test(s.feature)) {
          ok = false;
          break;
        }
        id = s.branch ? n.true_child : n.false_child;
      }
      ok = ok && t.node(id).is_leaf() && t.node(id).action == p.leaf_action && p.leaf_action == tree::tree_predict(t, f);
      mismatches += !ok;
    }
    c.detail << "1000 pairs over 6 trees, " << mismatches << " mismatches; ";
    c.expect(mismatches == 0, "path diverged from traversal");
  });

  report("golden-text", [&](Check& c) {
    int n = 0;
    for (const auto& line : lines_of(test::read_golden("predicates.txt"))) {
      std::istringstream in(line);
      int feature = 0, branch = 0;
      std::string text;
      in >> feature >> branch;
      std::getline(in >> std::ws, text);
      c.expect(repr::render_predicate(feature, branch != 0) == text, "predicate " + line);
      ++n;
    }
    for (const auto& line : lines_of(test::read_golden("actions.txt"))) {
      std::istringstream in(line);
      std::string role, action, text;
      int x = 0, y = 0;
      in >> role >> x >> y >> action;
      std::getline(in >> std::ws, text);
      c.expect(repr::render_action(env::parse_role(role), {x, y}, env::parse_action(action)) == text, "action " + line);
      ++n;
    }
    c.expect(repr::render_predicate(env::feature_index({0, 3}, env::Attribute::Explored), true) ==
                 "room (0, 3) has been explored.",
             "explored phrase");
    c.expect(repr::render_action(Role::Engineer, {0, 2}, Action::MoveEast) == "engineer moves east to room (1, 2).",
             "move phrase");

    const json fx = json::parse(test::read_golden("prompt_fixture.json"));
    const json& pj = fx.at("path");
    repr::PathBR path;
    path.path.role = env::parse_role(pj.at("role").get<std::string>());
    path.path.leaf_action = env::parse_action(pj.at("action").get<std::string>());
    for (const auto& s : pj.at("steps")) path.path.steps.push_back({s.at(0).get<int>(), s.at(1).get<bool>()});
    repr::StatesBR states;
    for (const auto& p : fx.at("states").at("pairs")) {
      env::Observation obs;
      for (const auto& r : p.at("explored")) obs.explored[env::room_index(coord(r))] = true;
      for (const auto& r : p.at("rubble")) obs.known_rubble[env::room_index(coord(r))] = true;
      for (const auto& r : p.at("victims")) obs.known_victim[env::room_index(coord(r))] = true;
      obs.medic_pos = coord(p.at("medic"));
      obs.engineer_pos = coord(p.at("engineer"));
      states.pairs.push_back({p.at("time").get<int>(), obs, env::parse_action(p.at("action").get<std::string>())});
    }
    states.k = static_cast<int>(states.pairs.size());

    const auto bundle = [&](const char* key, const repr::BehaviorRepresentation& br) {
      const json& j = fx.at(key);
      return llm::build_prompt(br, env::parse_role(j.at("role").get<std::string>()), coord(j.at("from")),
                               env::parse_action(j.at("action").get<std::string>()));
    };
    const std::pair<const char*, repr::BehaviorRepresentation> cases[] = {
        {"path", path}, {"states", states}, {"none", repr::NoBR{}}};
    for (const auto& [key, br] : cases) {
      const auto b = bundle(key, br);
      c.expect(b.full_text() == test::read_golden(std::string("prompt_") + key + ".txt"), std::string("prompt ") + key);
      c.expect(b.system_text() == llm::env_description() + "\n\n" + llm::br_description(), "frozen descriptions");
      ++n;
    }
    c.detail << n << " golden items; ";
  });

  report("ambiguity-mining", [&](Check& c) {
    const auto start = std::chrono::steady_clock::now();
    eval::SampleRequest req;
    req.behavior = Behavior::Explore;
    req.category = StateCategory::Ambiguous;
    req.n_per_role = 10;
    req.episode_budget = 500;
    req.seed = 2024;
    const eval::Surrogates sur{std::make_shared<tree::DecisionTree>(trees.at({Behavior::Explore, Role::Medic})),
                               std::make_shared<tree::DecisionTree>(trees.at({Behavior::Explore, Role::Engineer}))};
    const auto res = eval::sample_eval_states(req, sur);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(res.complete(), "shortfall within budget");
    int verified = 0;
    for (const auto& s : res.samples) {
      const auto& step = s.trajectory->steps[static_cast<std::size_t>(s.t)];
      const Action now_explore = policy::explore_act(step.obs, s.role);
      const Action now_exploit = policy::exploit_act(step.obs, s.role);
      const Action eng = s.role == Role::Engineer ? now_explore : step.engineer_action;
      const Action med = s.role == Role::Medic ? now_explore : step.medic_action;
      const auto next = env::observe(env::step(step.world, eng, med));
      const bool ok = now_explore == now_exploit && now_explore == step.action(s.role) &&
                      policy::explore_act(next, s.role) != policy::exploit_act(next, s.role) &&
                      s.category == StateCategory::Ambiguous &&
                      eval::categorize_state(*s.trajectory, s.t, s.role) == StateCategory::Ambiguous;
      verified += ok;
    }
    c.detail << res.samples.size() << " states from " << res.episodes_used << " episodes, " << verified
             << " re-verified; ";
    c.expect(res.samples.size() == 20 && verified == 20, "every state re-verifies");
    c.expect(res.episodes_used <= 500, "budget");
    c.expect(secs < 60.0, "runtime under a minute");
  });

  test::TempDir store_dir;
  auto bench = std::make_shared<service::Workbench>(std::make_shared<service::ArtifactStore>(store_dir.path()),
                                                    service::WorkbenchConfig{}, nullptr, nullptr);
  std::vector<std::string> generated;
  int predictions = 0, parseable = 0;
  report("offline-end-to-end", [&](Check& c) {
    for (Behavior b : policy::kAllBehaviors) {
      service::EvalRunRequest req;
      req.behavior = b;
      if (b != Behavior::Fixed) req.category = StateCategory::Ambiguous;
      req.n_per_role = 10;
      req.seed = 7;
      if (b == Behavior::Exploit) req.category = StateCategory::ShortTerm;
      const auto res = bench->run_eval(req);
      c.expect(res.record_ids.size() == 60, std::string(policy::to_string(b)) + " produced 60 records");
      generated.insert(generated.end(), res.record_ids.begin(), res.record_ids.end());
      predictions += res.predictions;
      parseable += res.parseable_predictions;
    }
    for (const auto& id : bench->store().list_explanations()) {
      const auto r = bench->store().get_explanation(id);
      c.expect(r.predicted_action.has_value() && r.predicted_action->role == r.role, "parseable prediction " + id);
      c.expect(r.explanation_text.has_value() && !r.explanation_text->empty(), "explanation text " + id);
    }
    c.detail << generated.size() << " records on the mock backend, " << parseable << "/" << predictions
             << " predictions parsed; ";
    c.expect(predictions == static_cast<int>(generated.size()) && parseable == predictions, "all predictions parse");
  });

  report("gating", [&](Check& c) {
    int gated = 0;
    const auto ids = bench->store().list_explanations();
    for (const auto& id : ids) {
      const auto r = bench->store().get_explanation(id);
      const auto traj = bench->store().get_trajectory(r.trajectory_id);
      const auto& step = traj.steps.at(static_cast<std::size_t>(r.t));
      const auto tree = bench->tree_for(r.behavior, r.role).tree;
      const Action predicted = tree::tree_predict(*tree, env::encode_features(step.obs));
      gated += r.gated && predicted == step.action(r.role) && r.action == step.action(r.role) &&
               r.tree_action == predicted;
    }
    c.detail << gated << "/" << ids.size() << " records gated; ";
    c.expect(!ids.empty() && gated == static_cast<int>(ids.size()), "every record gated");
  });

  report("statistics-oracle", [&](Check& c) {
    Rng rng(derive_seed(2, 0x57a7, 0));
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
      const int n = 3 + static_cast<int>(uniform_below(rng, 10));
      std::vector<double> x, y;
      for (int i = 0; i < n; ++i) {
        x.push_back(static_cast<double>(uniform_below(rng, 2001)) / 100.0 - 10.0);
        y.push_back(static_cast<double>(uniform_below(rng, 2001)) / 100.0 - 10.0);
      }
      if (std::set<double>(x.begin(), x.end()).size() < 2 || std::set<double>(y.begin(), y.end()).size() < 2) continue;
      const auto res = eval::pearson(x, y);
      worst = std::max(worst, std::abs(res.r - pearson_direct(x, y)));
      c.expect(std::abs(res.r) <= 1.0, "|r| <= 1");
      ++done;
    }
    c.expect(worst <= 1e-12, "r within 1e-12");
    const json fx = json::parse(test::read_golden("pearson_fixture.json"));
    const auto res = eval::pearson(fx.at("x").get<std::vector<double>>(), fx.at("y").get<std::vector<double>>());
    c.expect(std::abs(res.r - fx.at("r").get<double>()) < 1e-12, "fixture r");
    c.expect(std::abs(res.p - fx.at("p").get<double>()) < 1e-12, "fixture p");
    c.expect(res.significant() == fx.at("significant").get<bool>(), "fixture decision");
    const auto sig = eval::pearson({1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 7});
    c.expect(sig.significant(), "strong correlation significant");
    c.detail << "100 vectors, max |dr| " << worst << ", fixture p " << fmt(res.p) << " ("
             << (res.significant() ? "significant" : "not significant") << "); ";
  });

  report("golden-tables", [&](Check& c) {
    std::istringstream in(test::read_golden("labels_fixture.jsonl"));
    const auto records = eval::read_labels(in);
    const auto cells = eval::score_cells(records);
    const auto rates = eval::hallucination_rates(records);
    c.expect(eval::explanation_table(cells) == test::read_golden("table_explanation.txt"), "explanation table");
    c.expect(eval::prediction_table(cells) == test::read_golden("table_prediction.txt"), "prediction table");
    c.expect(eval::fixed_table(cells) == test::read_golden("table_fixed.txt"), "fixed table");
    c.expect(eval::hallucination_table(rates) == test::read_golden("table_hallucination.txt"), "hallucination table");
    c.expect(eval::correlation_text(eval::hallucination_correlation(records)) == test::read_golden("correlation.txt"),
             "correlation text");
    bool twenty = true;
    for (const auto& cell : cells) twenty = twenty && cell.denominator == 20;
    c.expect(twenty, "20 labels per cell");
    c.detail << records.size() << " labels, " << cells.size() << " cells; ";
  });

  if (live) run_live(*bench, std::filesystem::current_path());

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures;
}
