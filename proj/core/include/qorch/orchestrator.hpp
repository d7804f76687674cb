#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qorch/backend.hpp"

namespace qorch {

enum class JobStatus { queued, running, done, failed, cancelled };

std::string to_string(JobStatus status);

/// Point-in-time view of one job's state machine. Legal transitions:
/// queued→running, queued→cancelled, running→{done, failed, cancelled}.
/// Timestamps are milliseconds since service start on the monotonic clock.
struct JobSnapshot {
    std::string job_id;
    JobStatus status = JobStatus::queued;
    std::optional<int> worker_id;
    double submitted_at = 0;
    std::optional<double> started_at;
    std::optional<double> finished_at;
    std::optional<ExecutionResult> result; // present iff done
    std::string error_code;                // nonempty iff failed or cancelled
    std::string error_message;
};

struct ServiceConfig {
    int workers = 8;
    std::string journal_path; // append-only JSONL transition log; empty = off
    uint64_t session_seed = 0; // token for job ids; 0 = derive from the clock
};

/// Job queue plus worker pool. Submissions land in a single global FIFO; a
/// dispatcher hands each job to the next idle worker in round-robin order.
/// All entry points are safe to call from many threads at once.
class Service {
public:
    Service(BackendRegistry registry, ServiceConfig config = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Validates and enqueues; returns the new job id without blocking.
    std::string submit(const ExecutionRequest& request);

    /// All-or-nothing: any invalid member rejects the whole batch with
    /// per-index diagnostics and nothing is enqueued.
    std::vector<std::string> submit_batch(const std::vector<ExecutionRequest>& requests);

    JobSnapshot status(const std::string& job_id) const;

    /// wait=true blocks until the job is terminal or timeout_ms elapses
    /// (QorchError "timeout"); wait=false throws "not-ready" when the job is
    /// still in flight. Failed and cancelled jobs rethrow their error.
    ExecutionResult result(const std::string& job_id, bool wait = true,
                           double timeout_ms = 60000);

    /// Queued jobs never run; running jobs are interrupted at the next gate
    /// boundary. Idempotent on terminal jobs.
    void cancel(const std::string& job_id);

    struct WorkerInfo {
        int id = 0;
        bool busy = false;
        std::string current_job;
    };
    std::vector<WorkerInfo> workers() const;
    std::vector<BackendDescriptor> backends() const;

    /// Stops accepting submissions, then either finishes the backlog
    /// (drain=true) or cancels everything still pending. Idempotent.
    void shutdown(bool drain = true);

    /// Milliseconds since service start.
    double now_ms() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// HTTP/JSON front door for a Service (the wire protocol used by Client).
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds 127.0.0.1 and serves on a background thread; 0 picks a port.
    void start(int port = 0);
    int port() const;
    void stop();

    /// Blocks until a wire-level POST /v1/shutdown has been fully processed
    /// (or stop() is called). Used by the serve command.
    void wait_until_stopped();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace qorch
