#include "brx/service.hpp"

namespace brx::service {

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "?";
}

JobQueue::JobQueue(int workers) {
  if (workers < 1) workers = 1;
  for (int i = 0; i < workers; ++i) workers_.emplace_back([this] { run(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lk(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

std::string JobQueue::submit(std::string kind, std::function<json()> work) {
  std::lock_guard lk(mu_);
  const std::string id = "job-" + std::to_string(next_++);
  jobs_[id] = JobInfo{id, std::move(kind), JobStatus::Queued, nullptr, std::nullopt};
  pending_.emplace_back(id, std::move(work));
  cv_.notify_all();
  return id;
}

std::optional<JobInfo> JobQueue::get(const std::string& id) const {
  std::lock_guard lk(mu_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

JobInfo JobQueue::wait(const std::string& id) const {
  std::unique_lock lk(mu_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) throw ApiError(ApiCode::NotFound, "no job '" + id + "'");
  cv_.wait(lk, [&] { return it->second.status == JobStatus::Done || it->second.status == JobStatus::Failed; });
  return it->second;
}

void JobQueue::run() {
  for (;;) {
    std::pair<std::string, std::function<json()>> job;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return stopping_ || !pending_.empty(); });
      if (pending_.empty()) return;
      job = std::move(pending_.front());
      pending_.pop_front();
      jobs_[job.first].status = JobStatus::Running;
    }
    json result;
    std::optional<ApiError> error;
    try {
      result = job.second();
    } catch (const std::exception& e) {
      error = to_api_error(e);
    }
    {
      std::lock_guard lk(mu_);
      auto& info = jobs_[job.first];
      info.status = error ? JobStatus::Failed : JobStatus::Done;
      info.result = std::move(result);
      info.error = std::move(error);
    }
    cv_.notify_all();
  }
}

}  // namespace brx::service
