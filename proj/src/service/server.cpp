#include <httplib.h>

#include <sstream>

#include "brx/errors.hpp"
#include "brx/llm_io.hpp"
#include "brx/service.hpp"

namespace brx::service {

namespace {

json error_body(const ApiError& e) {
  return {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw ApiError(ApiCode::Invalid, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ApiError(ApiCode::Invalid, std::string("request body is not valid JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& body, const char* key) {
  if (!body.contains(key)) throw ApiError(ApiCode::Invalid, std::string("missing field '") + key + "'");
  try {
    return body.at(key).get<T>();
  } catch (const json::exception&) {
    throw ApiError(ApiCode::Invalid, std::string("field '") + key + "' has the wrong type");
  }
}

// Runs a handler, turning every exception into its ApiError response.
template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::exception& e) {
      const ApiError api = to_api_error(e);
      send_json(res, http_status(api.code()), error_body(api));
    }
  };
}

json step_payload(const std::string& id, const policy::Trajectory& traj, std::size_t t) {
  json out{{"episode_id", id}, {"t", t}, {"steps", traj.size()}};
  const env::Observation obs = traj.observation_at(t);
  out["observation"] = obs;
  out["observation_text"] = repr::render_observation(obs);
  if (t == traj.size()) {
    out["terminal"] = true;
    out["world"] = traj.final_world;
    return out;
  }
  const auto& s = traj.steps[t];
  out["terminal"] = false;
  out["world"] = s.world;
  for (env::Role r : env::kRoles) {
    const std::string who(env::to_string(r));
    out[who + "_action"] = env::to_string(s.action(r));
    out[who + "_action_text"] = repr::render_action(r, obs.position(r), s.action(r));
    out[who + "_goal"] = s.goal(r) ? json(*s.goal(r)) : json(nullptr);
  }
  return out;
}

json tree_summary(const TreeArtifact& t) {
  json j = tree_artifact_to_json(t);
  j.erase("tree");
  return j;
}

json job_payload(const JobInfo& info) {
  json j{{"id", info.id}, {"kind", info.kind}, {"status", to_string(info.status)}};
  if (info.status == JobStatus::Done) j["result"] = info.result;
  if (info.error) j["error"] = error_body(*info.error)["error"];
  return j;
}

}  // namespace

struct HttpService::Impl {
  std::shared_ptr<Workbench> bench;
  ServerOptions options;
  JobQueue jobs;
  httplib::Server server;
  std::thread thread;

  Impl(std::shared_ptr<Workbench> b, ServerOptions o)
      : bench(std::move(b)), options(std::move(o)), jobs(options.workers) {
    routes();
  }

  void routes() {
    auto& s = server;
    Workbench& wb = *bench;

    s.Post("/episodes", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             const auto behavior = policy::parse_behavior(field<std::string>(body, "behavior"));
             const auto seed = body.value("seed", std::uint64_t{0});
             const int episodes = body.value("episodes", 1);
             if (episodes < 1) throw ApiError(ApiCode::Invalid, "episodes must be positive");
             auto work = [wb = bench, behavior, seed, episodes] {
               return json{{"ids", wb->rollout(behavior, seed, episodes)}};
             };
             if (body.value("wait", true)) {
               send_json(res, 201, work());
               return;
             }
             const std::string job = jobs.submit("rollout", work);
             send_json(res, 202, {{"job_id", job}, {"status_url", "/jobs/" + job}});
           }));
    s.Get("/episodes", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"ids", wb.store().list_trajectories()}});
          }));
    s.Get(R"(/episodes/([^/]+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto traj = wb.store().get_trajectory(id);
            send_json(res, 200,
                      {{"id", id},
                       {"config", traj.config},
                       {"engineer_policy", traj.engineer_policy},
                       {"medic_policy", traj.medic_policy},
                       {"steps", traj.size()},
                       {"victims_total", traj.final_world.victims_total()},
                       {"victims_rescued", traj.final_world.victims_rescued()}});
          }));
    s.Get(R"(/episodes/([^/]+)/steps/(\d+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto traj = wb.store().get_trajectory(id);
            const auto t = std::stoull(req.matches[2]);
            if (t > traj.size()) {
              throw ApiError(ApiCode::NotFound, "episode " + id + " has no step " + std::to_string(t));
            }
            send_json(res, 200, step_payload(id, traj, t));
          }));

    s.Post("/trees", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             const auto behavior = policy::parse_behavior(field<std::string>(body, "behavior"));
             const auto role = env::parse_role(field<std::string>(body, "role"));
             tree::DistillConfig cfg = bench->config().distill;
             if (body.contains("config")) {
               json c = body.at("config");
               if (!c.contains("env")) c["env"] = cfg.env;
               cfg = c.get<tree::DistillConfig>();
               cfg.validate();
             }
             const int fid = body.value("fidelity_episodes", bench->config().fidelity_episodes);
             auto work = [wb = bench, behavior, role, cfg, fid] {
               return tree_summary(wb->distill(behavior, role, cfg, fid));
             };
             if (body.value("wait", false)) {
               send_json(res, 200, work());
               return;
             }
             const std::string job = jobs.submit("distill", work);
             send_json(res, 202, {{"job_id", job}, {"status_url", "/jobs/" + job}});
           }));
    s.Get("/trees", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"ids", wb.store().list_trees()}});
          }));
    s.Get(R"(/trees/([^/]+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, tree_artifact_to_json(wb.store().get_tree(req.matches[1])));
          }));
    s.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto info = jobs.get(req.matches[1]);
            if (!info) throw ApiError(ApiCode::NotFound, "no job '" + req.matches[1].str() + "'");
            send_json(res, 200, job_payload(*info));
          }));

    s.Post("/explanations", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             ExplainRequest er;
             er.trajectory_id = field<std::string>(body, "episode");
             er.t = field<int>(body, "t");
             er.role = env::parse_role(field<std::string>(body, "role"));
             er.br_kind = repr::parse_br_kind(body.value("br_kind", std::string("path")));
             er.live = body.value("live", false);
             er.predict = body.value("predict", true);
             send_json(res, 200, llm::record_to_json(wb.explain(er)));
           }));
    s.Get("/explanations", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"ids", wb.store().list_explanations()}});
          }));
    s.Get(R"(/explanations/([^/]+))", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, llm::record_to_json(wb.store().get_explanation(req.matches[1])));
          }));
    s.Post(R"(/explanations/([^/]+)/chat)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const json body = parse_body(req);
             const std::string reply = wb.chat(id, field<std::string>(body, "text"));
             const auto rec = wb.store().get_explanation(id);
             send_json(res, 200, {{"reply", reply}, {"session", rec.session}});
           }));
    s.Post(R"(/explanations/([^/]+)/labels)", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             eval::AnnotationLabels labels;
             try {
               labels = body.get<eval::AnnotationLabels>();
             } catch (const json::exception& e) {
               throw ApiError(ApiCode::Invalid, e.what());
             }
             send_json(res, 200, json(wb.label(req.matches[1], labels)));
           }));

    // Bulk import; the body is a label file, one JSON object per line.
    s.Post("/labels", guarded([&wb](const httplib::Request& req, httplib::Response& res) {
             std::istringstream in(req.body);
             send_json(res, 200, {{"imported", wb.import_labels(in)}});
           }));

    s.Get("/reports/accuracy", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, wb.accuracy_report());
          }));
    s.Get("/reports/hallucination", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, wb.hallucination_report());
          }));
    s.Get("/reports/fidelity", guarded([&wb](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"trees", wb.fidelity_report()}});
          }));

    s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        send_json(res, 404, error_body(ApiError(ApiCode::NotFound, "no route for " + req.method + " " + req.path)));
      }
    });
  }
};

HttpService::HttpService(std::shared_ptr<Workbench> bench, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(bench), std::move(options))) {}

HttpService::~HttpService() { stop(); }

int HttpService::start() {
  int port = impl_->options.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (!impl_->server.bind_to_port(impl_->options.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpService::run() {
  if (!impl_->server.listen(impl_->options.host, impl_->options.port)) {
    throw Error("cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace brx::service
