#include "qorch/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "qorch/rng.hpp"

namespace qorch {

using nlohmann::json;

std::string to_string(JobStatus status) {
    switch (status) {
    case JobStatus::queued:
        return "queued";
    case JobStatus::running:
        return "running";
    case JobStatus::done:
        return "done";
    case JobStatus::failed:
        return "failed";
    case JobStatus::cancelled:
        return "cancelled";
    }
    return "?";
}

namespace {

bool is_terminal(JobStatus s) {
    return s == JobStatus::done || s == JobStatus::failed || s == JobStatus::cancelled;
}

struct Job {
    std::string id;
    ExecutionRequest request;
    JobStatus status = JobStatus::queued;
    std::optional<int> worker_id;
    double submitted_at = 0;
    std::optional<double> started_at;
    std::optional<double> finished_at;
    std::optional<ExecutionResult> result;
    std::string error_code;
    std::string error_message;
    std::atomic<bool> cancel{false};
};

} // namespace

struct Service::Impl {
    BackendRegistry registry;
    ServiceConfig config;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    mutable std::mutex mu;
    std::condition_variable cv_dispatch; // dispatcher: new work / freed worker / stop
    std::condition_variable cv_assign;   // workers: assignment available / stop
    std::condition_variable cv_done;     // waiters: some job reached a terminal state

    std::unordered_map<std::string, std::unique_ptr<Job>> jobs;
    std::deque<Job*> fifo;

    struct Slot {
        int id = 0;
        Job* assigned = nullptr;
        bool busy = false;
    };
    std::vector<Slot> slots;
    std::vector<std::thread> worker_threads;
    std::thread dispatcher_thread;

    size_t next_rr = 0;
    uint64_t next_job_number = 1;
    std::string session_token;
    bool accepting = true;
    bool stopping = false;
    bool joined = false;
    std::ofstream journal;

    double now_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }

    // Caller holds mu.
    void journal_event(const Job& job, const std::string& event) {
        if (!journal.is_open()) return;
        json line{{"ts_ms", now_ms()}, {"job_id", job.id}, {"event", event}};
        if (job.worker_id) line["worker_id"] = *job.worker_id;
        if (!job.error_code.empty()) line["error_code"] = job.error_code;
        journal << line.dump() << "\n";
        journal.flush();
    }

    // Caller holds mu.
    JobSnapshot snapshot(const Job& job) const {
        JobSnapshot snap;
        snap.job_id = job.id;
        snap.status = job.status;
        snap.worker_id = job.worker_id;
        snap.submitted_at = job.submitted_at;
        snap.started_at = job.started_at;
        snap.finished_at = job.finished_at;
        snap.result = job.result;
        snap.error_code = job.error_code;
        snap.error_message = job.error_message;
        return snap;
    }

    // Caller holds mu. Throws for unknown ids.
    Job& find(const std::string& id) {
        const auto it = jobs.find(id);
        if (it == jobs.end()) throw QorchError("not-found", "no such job: " + id);
        return *it->second;
    }

    void dispatch_loop() {
        std::unique_lock lock(mu);
        for (;;) {
            cv_dispatch.wait(lock, [&] {
                if (stopping) return true;
                if (fifo.empty()) return false;
                for (const auto& slot : slots)
                    if (!slot.busy) return true;
                return false;
            });
            if (stopping) return;
            // Round-robin over idle workers: scan from one past the last
            // assignment so an initially idle pool fills 0, 1, 2, ...
            size_t chosen = slots.size();
            for (size_t k = 0; k < slots.size(); ++k) {
                const size_t i = (next_rr + k) % slots.size();
                if (!slots[i].busy) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == slots.size()) continue;
            Job* job = fifo.front();
            fifo.pop_front();
            slots[chosen].assigned = job;
            slots[chosen].busy = true;
            job->worker_id = slots[chosen].id;
            next_rr = (chosen + 1) % slots.size();
            cv_assign.notify_all();
        }
    }

    void worker_loop(size_t index) {
        std::unique_lock lock(mu);
        Slot& slot = slots[index];
        for (;;) {
            cv_assign.wait(lock, [&] { return stopping || slot.assigned; });
            if (!slot.assigned) {
                if (stopping) return;
                continue;
            }
            Job* job = slot.assigned;
            job->status = JobStatus::running;
            job->started_at = now_ms();
            journal_event(*job, "running");
            lock.unlock();

            std::optional<ExecutionResult> result;
            std::string error_code, error_message;
            try {
                result = adapter_execute(registry, job->request, &job->cancel);
            } catch (const QorchError& e) {
                error_code = e.code;
                error_message = e.what();
            } catch (const std::exception& e) {
                error_code = "internal";
                error_message = e.what();
            }

            lock.lock();
            job->finished_at = now_ms();
            if (result) {
                result->worker_id = *job->worker_id;
                result->queue_ms = *job->started_at - job->submitted_at;
                job->result = std::move(result);
                job->status = JobStatus::done;
            } else if (error_code == "cancelled") {
                job->status = JobStatus::cancelled;
                job->error_code = error_code;
                job->error_message = error_message;
            } else {
                job->status = JobStatus::failed;
                job->error_code = error_code;
                job->error_message = error_message;
            }
            journal_event(*job, to_string(job->status));
            slot.assigned = nullptr;
            slot.busy = false;
            cv_done.notify_all();
            cv_dispatch.notify_one();
        }
    }

    // Caller holds mu. Validation only; no state change.
    void check_request(const ExecutionRequest& request, const std::string& label) {
        if (request.shots < 1)
            throw QorchError("validation", label + "shots must be >= 1");
        auto problems = validate(request.circuit);
        if (!problems.empty())
            throw QorchError("validation", label + "invalid circuit: " + problems.front());
        if (!registry.find(request.selector.backend))
            throw QorchError("unknown-backend",
                             label + "no such backend: " + request.selector.backend);
    }

    // Caller holds mu. Assumes the request already passed check_request.
    std::string enqueue(const ExecutionRequest& request) {
        auto job = std::make_unique<Job>();
        job->id = std::to_string(next_job_number++) + "-" + session_token;
        job->request = request;
        job->submitted_at = now_ms();
        Job* raw = job.get();
        jobs.emplace(raw->id, std::move(job));
        fifo.push_back(raw);
        journal_event(*raw, "submitted");
        cv_dispatch.notify_one();
        return raw->id;
    }
};

Service::Service(BackendRegistry registry, ServiceConfig config) : impl_(new Impl) {
    if (config.workers < 1)
        throw QorchError("config", "workers must be >= 1, got " + std::to_string(config.workers));
    impl_->registry = std::move(registry);
    impl_->config = config;
    uint64_t token_seed = config.session_seed;
    if (token_seed == 0)
        token_seed = uint64_t(std::chrono::steady_clock::now().time_since_epoch().count());
    char token[17];
    std::snprintf(token, sizeof token, "%08llx",
                  static_cast<unsigned long long>(Rng(token_seed).next_u64() & 0xffffffffull));
    impl_->session_token = token;
    if (!config.journal_path.empty()) {
        impl_->journal.open(config.journal_path, std::ios::app);
        if (!impl_->journal)
            throw QorchError("config", "cannot open journal file: " + config.journal_path);
    }
    impl_->slots.resize(size_t(config.workers));
    for (int i = 0; i < config.workers; ++i) impl_->slots[size_t(i)].id = i;
    impl_->dispatcher_thread = std::thread([this] { impl_->dispatch_loop(); });
    for (size_t i = 0; i < impl_->slots.size(); ++i)
        impl_->worker_threads.emplace_back([this, i] { impl_->worker_loop(i); });
}

Service::~Service() { shutdown(false); }

std::string Service::submit(const ExecutionRequest& request) {
    std::lock_guard lock(impl_->mu);
    if (!impl_->accepting) throw QorchError("shutting-down", "service is shutting down");
    impl_->check_request(request, "");
    return impl_->enqueue(request);
}

std::vector<std::string> Service::submit_batch(const std::vector<ExecutionRequest>& requests) {
    std::lock_guard lock(impl_->mu);
    if (!impl_->accepting) throw QorchError("shutting-down", "service is shutting down");
    for (size_t i = 0; i < requests.size(); ++i)
        impl_->check_request(requests[i], "job " + std::to_string(i) + ": ");
    std::vector<std::string> ids;
    ids.reserve(requests.size());
    for (const auto& request : requests) ids.push_back(impl_->enqueue(request));
    return ids;
}

JobSnapshot Service::status(const std::string& job_id) const {
    std::lock_guard lock(impl_->mu);
    return impl_->snapshot(impl_->find(job_id));
}

ExecutionResult Service::result(const std::string& job_id, bool wait, double timeout_ms) {
    std::unique_lock lock(impl_->mu);
    Job& job = impl_->find(job_id);
    if (!is_terminal(job.status)) {
        if (!wait) throw QorchError("not-ready", "job still in flight: " + job_id);
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double, std::milli>(timeout_ms));
        if (!impl_->cv_done.wait_until(lock, deadline, [&] { return is_terminal(job.status); }))
            throw QorchError("timeout", "job not terminal after " + std::to_string(timeout_ms) +
                                            " ms: " + job_id);
    }
    if (job.status == JobStatus::done) return *job.result;
    if (job.status == JobStatus::cancelled)
        throw QorchError("cancelled", "job was cancelled: " + job_id);
    throw QorchError(job.error_code.empty() ? "failed" : job.error_code, job.error_message);
}

void Service::cancel(const std::string& job_id) {
    std::lock_guard lock(impl_->mu);
    Job& job = impl_->find(job_id);
    if (is_terminal(job.status)) return; // idempotent
    const auto it = std::find(impl_->fifo.begin(), impl_->fifo.end(), &job);
    if (it != impl_->fifo.end()) {
        // Still queued: it never reaches a worker.
        impl_->fifo.erase(it);
        job.status = JobStatus::cancelled;
        job.finished_at = impl_->now_ms();
        job.error_code = "cancelled";
        job.error_message = "cancelled before execution";
        impl_->journal_event(job, "cancelled");
        impl_->cv_done.notify_all();
        return;
    }
    // Assigned or running: the engine aborts at the next gate boundary.
    job.cancel.store(true);
}

std::vector<Service::WorkerInfo> Service::workers() const {
    std::lock_guard lock(impl_->mu);
    std::vector<WorkerInfo> out;
    out.reserve(impl_->slots.size());
    for (const auto& slot : impl_->slots)
        out.push_back({slot.id, slot.busy, slot.assigned ? slot.assigned->id : ""});
    return out;
}

std::vector<BackendDescriptor> Service::backends() const { return impl_->registry.list(); }

void Service::shutdown(bool drain) {
    {
        std::unique_lock lock(impl_->mu);
        if (impl_->joined) return;
        impl_->accepting = false;
        if (drain) {
            impl_->cv_done.wait(lock, [&] {
                if (!impl_->fifo.empty()) return false;
                for (const auto& slot : impl_->slots)
                    if (slot.busy) return false;
                return true;
            });
        } else {
            for (Job* job : impl_->fifo) {
                job->status = JobStatus::cancelled;
                job->finished_at = impl_->now_ms();
                job->error_code = "cancelled";
                job->error_message = "cancelled at shutdown";
                impl_->journal_event(*job, "cancelled");
            }
            impl_->fifo.clear();
            for (const auto& slot : impl_->slots)
                if (slot.assigned) slot.assigned->cancel.store(true);
            impl_->cv_done.notify_all();
        }
        impl_->stopping = true;
        impl_->cv_dispatch.notify_all();
        impl_->cv_assign.notify_all();
    }
    if (impl_->dispatcher_thread.joinable()) impl_->dispatcher_thread.join();
    for (auto& thread : impl_->worker_threads)
        if (thread.joinable()) thread.join();
    std::lock_guard lock(impl_->mu);
    impl_->joined = true;
    impl_->cv_done.notify_all();
}

double Service::now_ms() const { return impl_->now_ms(); }

// ---------------------------------------------------------------------------
// Wire protocol

namespace {

int http_status_for(const std::string& code) {
    if (code == "not-found") return 404;
    if (code == "timeout") return 408;
    if (code == "not-ready") return 409;
    if (code == "cancelled") return 410;
    if (code == "validation" || code == "bad-request" || code == "unknown-backend" ||
        code == "unknown-subbackend" || code == "unknown-property" || code == "config")
        return 400;
    if (code == "shutting-down") return 503;
    return 500;
}

void reply_error(httplib::Response& res, const std::string& code, const std::string& message) {
    res.status = http_status_for(code);
    res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(),
                    "application/json");
}

ExecutionRequest request_from_json(const json& body) {
    ExecutionRequest request;
    try {
        request.circuit = parse_circuit_text(body.at("circuit").get<std::string>());
        request.shots = body.value("shots", uint64_t{1024});
        request.selector.backend = body.value("backend", std::string("sv"));
        request.selector.subbackend = body.value("subbackend", std::string());
        if (body.contains("properties"))
            for (const auto& [key, value] : body.at("properties").items())
                request.selector.properties[key] = value.get<std::string>();
        request.seed = body.value("seed", uint64_t{0});
        if (body.contains("deadline_ms")) request.deadline_ms = body.at("deadline_ms").get<double>();
    } catch (const QorchError&) {
        throw;
    } catch (const std::exception& e) {
        throw QorchError("bad-request", e.what());
    }
    return request;
}

json result_to_json(const ExecutionResult& result) {
    json counts = json::object();
    for (const auto& [key, count] : result.counts) counts[key] = count;
    return json{{"counts", counts},     {"shots", result.shots},
                {"backend", result.backend}, {"worker_id", result.worker_id},
                {"queue_ms", result.queue_ms}, {"exec_ms", result.exec_ms},
                {"seed", result.seed}};
}

json snapshot_to_json(const JobSnapshot& snap) {
    json out{{"job_id", snap.job_id},
             {"status", to_string(snap.status)},
             {"submitted_at", snap.submitted_at}};
    if (snap.worker_id) out["worker_id"] = *snap.worker_id;
    if (snap.started_at) out["started_at"] = *snap.started_at;
    if (snap.finished_at) out["finished_at"] = *snap.finished_at;
    if (!snap.error_code.empty()) {
        out["error_code"] = snap.error_code;
        out["error_message"] = snap.error_message;
    }
    return out;
}

json descriptor_to_json(const BackendDescriptor& desc) {
    return json{{"name", desc.name},
                {"subbackends", desc.subbackends},
                {"max_qubits", desc.max_qubits},
                {"locality", desc.locality == Locality::remote ? "remote" : "local"},
                {"notes", desc.notes}};
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const QorchError& e) {
        reply_error(res, e.code, e.what());
    } catch (const std::exception& e) {
        reply_error(res, "internal", e.what());
    }
}

} // namespace

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
    std::thread serve_thread;
    std::thread shutdown_thread;
    std::mutex mu;
    std::condition_variable cv;
    bool stopped = false;
    int port = 0;

    explicit Impl(Service& s) : service(s) {
        server.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string id = service.submit(request_from_json(json::parse(req.body)));
                res.status = 201;
                res.set_content(json{{"job_id", id}}.dump(), "application/json");
            });
        });
        server.Post("/v1/jobs/batch", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::vector<ExecutionRequest> requests;
                try {
                    const json body = json::parse(req.body);
                    for (const auto& item : body.at("jobs"))
                        requests.push_back(request_from_json(item));
                } catch (const QorchError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw QorchError("bad-request", e.what());
                }
                const auto ids = service.submit_batch(requests);
                res.status = 201;
                res.set_content(json{{"job_ids", ids}}.dump(), "application/json");
            });
        });
        server.Get(R"(/v1/jobs/([^/]+)/result)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] {
                           const bool wait = req.get_param_value("wait") == "true";
                           double timeout_ms = 60000;
                           if (req.has_param("timeout_ms"))
                               timeout_ms = std::stod(req.get_param_value("timeout_ms"));
                           const auto result = service.result(req.matches[1], wait, timeout_ms);
                           res.set_content(result_to_json(result).dump(), "application/json");
                       });
                   });
        server.Get(R"(/v1/jobs/([^/]+))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       guarded(res, [&] {
                           const auto snap = service.status(req.matches[1]);
                           res.set_content(snapshot_to_json(snap).dump(), "application/json");
                       });
                   });
        server.Delete(R"(/v1/jobs/([^/]+))",
                      [this](const httplib::Request& req, httplib::Response& res) {
                          guarded(res, [&] {
                              service.cancel(req.matches[1]);
                              res.set_content(json{{"ok", true}}.dump(), "application/json");
                          });
                      });
        server.Get("/v1/backends", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                json list = json::array();
                for (const auto& desc : service.backends()) list.push_back(descriptor_to_json(desc));
                res.set_content(json{{"backends", list}}.dump(), "application/json");
            });
        });
        server.Get("/v1/workers", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                json list = json::array();
                for (const auto& info : service.workers()) {
                    json entry{{"id", info.id}, {"busy", info.busy}};
                    if (!info.current_job.empty()) entry["current_job"] = info.current_job;
                    list.push_back(entry);
                }
                res.set_content(json{{"workers", list}}.dump(), "application/json");
            });
        });
        server.Post("/v1/shutdown", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                bool drain = true;
                if (!req.body.empty()) drain = json::parse(req.body).value("drain", true);
                res.status = 202;
                res.set_content(json{{"ok", true}}.dump(), "application/json");
                std::lock_guard lock(mu);
                if (shutdown_thread.joinable()) return; // already shutting down
                shutdown_thread = std::thread([this, drain] {
                    service.shutdown(drain);
                    server.stop();
                    std::lock_guard inner(mu);
                    stopped = true;
                    cv.notify_all();
                });
            });
        });
    }
};

HttpServer::HttpServer(Service& service) : impl_(new Impl(service)) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port < 0) throw QorchError("bind-failed", "could not bind a loopback port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw QorchError("bind-failed", "could not bind port " + std::to_string(port));
        impl_->port = port;
    }
    impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

int HttpServer::port() const { return impl_->port; }

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
    if (impl_->shutdown_thread.joinable()) impl_->shutdown_thread.join();
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
    impl_->cv.notify_all();
}

void HttpServer::wait_until_stopped() {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->stopped; });
}

} // namespace qorch
