#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "qorch/result.hpp"

namespace qorch {

struct ClientConfig {
    std::string host = "127.0.0.1";
    int port = 0;
    BackendSelector default_selector;
    uint64_t default_shots = 1024;
    double poll_interval_ms = 50;   // fallback polling cadence
    double long_poll_ms = 5000;     // server-side wait per round trip
    double total_timeout_ms = 600000;
    int transport_retries = 2; // bounded; applied per request
};

/// One result slot of execute_many: either the result or that job's error.
struct ResultOrError {
    std::optional<ExecutionResult> result;
    std::string error_code;    // nonempty iff failed
    std::string error_message;

    bool ok() const { return result.has_value(); }
};

/// Wire-protocol frontend for the orchestrator. Instances are shareable
/// across threads; every call opens its own connection.
class Client {
public:
    explicit Client(ClientConfig config);
    ~Client();
    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    /// Awaitable completion token. Awaiting twice returns the same result;
    /// a cancelled or failed job throws the same error each time.
    class AsyncHandle {
    public:
        const std::string& job_id() const;
        ExecutionResult await();
        ~AsyncHandle();
        AsyncHandle(AsyncHandle&&) noexcept;
        AsyncHandle& operator=(AsyncHandle&&) noexcept;

    private:
        friend class Client;
        struct State;
        explicit AsyncHandle(std::shared_ptr<State> state);
        std::shared_ptr<State> state_;
    };

    /// Blocking submit + wait.
    ExecutionResult execute(const Circuit& circuit, std::optional<uint64_t> shots = {},
                            std::optional<BackendSelector> selector = {},
                            uint64_t seed = 0);

    /// Returns once the job is accepted; completion happens at await().
    AsyncHandle execute_async(const Circuit& circuit, std::optional<uint64_t> shots = {},
                              std::optional<BackendSelector> selector = {},
                              uint64_t seed = 0);

    /// Batch submit over /v1/jobs/batch; output order equals input order.
    /// Per-job failures come back in their slot, not as an exception.
    std::vector<ResultOrError> execute_many(const std::vector<Circuit>& circuits,
                                            std::optional<uint64_t> shots = {},
                                            std::optional<BackendSelector> selector = {},
                                            uint64_t seed = 0);

    /// GET /v1/backends → descriptor names.
    std::vector<std::string> backend_names();

    void cancel(const std::string& job_id);
    void shutdown_server(bool drain = true);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Reads "host:port" (or just ":port" / "port") into a ClientConfig.
ClientConfig parse_endpoint(const std::string& endpoint);

} // namespace qorch
