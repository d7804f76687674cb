#include "qorch/client.hpp"

#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace qorch {

using nlohmann::json;

namespace {

ExecutionResult result_from_json(const json& body) {
    ExecutionResult result;
    for (const auto& [key, count] : body.at("counts").items())
        result.counts[key] = count.get<uint64_t>();
    result.shots = body.at("shots").get<uint64_t>();
    result.backend = body.at("backend").get<std::string>();
    result.worker_id = body.at("worker_id").get<int>();
    result.queue_ms = body.at("queue_ms").get<double>();
    result.exec_ms = body.at("exec_ms").get<double>();
    result.seed = body.at("seed").get<uint64_t>();
    return result;
}

[[noreturn]] void throw_wire_error(int status, const std::string& body) {
    std::string code = "http-" + std::to_string(status), message = body;
    try {
        const json err = json::parse(body).at("error");
        code = err.at("code").get<std::string>();
        message = err.at("message").get<std::string>();
    } catch (const std::exception&) {
    }
    throw QorchError(code, message);
}

} // namespace

struct Client::Impl {
    ClientConfig config;

    httplib::Result send(const std::string& method, const std::string& path,
                         const std::string& body, double read_timeout_ms) {
        httplib::Client http(config.host, config.port);
        http.set_connection_timeout(std::chrono::milliseconds(2000));
        http.set_read_timeout(
            std::chrono::milliseconds(int64_t(read_timeout_ms) + 2000));
        if (method == "POST") return http.Post(path, body, "application/json");
        if (method == "DELETE") return http.Delete(path);
        return http.Get(path);
    }

    /// One logical request with bounded transport retries. HTTP error
    /// replies are surfaced, never retried.
    json request(const std::string& method, const std::string& path,
                 const std::string& body = "", double read_timeout_ms = 10000,
                 int expected_status = 200) {
        httplib::Result res = send(method, path, body, read_timeout_ms);
        for (int attempt = 0; !res && attempt < config.transport_retries; ++attempt) {
            std::this_thread::sleep_for(
                std::chrono::duration<double, std::milli>(config.poll_interval_ms));
            res = send(method, path, body, read_timeout_ms);
        }
        if (!res)
            throw QorchError("transport-error", "orchestrator unreachable at " + config.host +
                                                    ":" + std::to_string(config.port) + " (" +
                                                    httplib::to_string(res.error()) + ")");
        if (res->status != expected_status) throw_wire_error(res->status, res->body);
        return res->body.empty() ? json::object() : json::parse(res->body);
    }

    json job_json(const Circuit& circuit, std::optional<uint64_t> shots,
                  const std::optional<BackendSelector>& selector, uint64_t seed) const {
        const BackendSelector& sel = selector ? *selector : config.default_selector;
        json props = json::object();
        for (const auto& [key, value] : sel.properties) props[key] = value;
        return json{{"circuit", serialize_circuit(circuit)},
                    {"shots", shots.value_or(config.default_shots)},
                    {"backend", sel.backend},
                    {"subbackend", sel.subbackend},
                    {"properties", props},
                    {"seed", seed}};
    }

    std::string submit(const json& body) {
        return request("POST", "/v1/jobs", body.dump(), 10000, 201).at("job_id");
    }

    /// Long-poll until the job is terminal; falls back to another round
    /// trip on each server-side 408 until the total budget runs out.
    ExecutionResult wait_result(const std::string& job_id) {
        const auto deadline =
            std::chrono::steady_clock::now() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double, std::milli>(config.total_timeout_ms));
        for (;;) {
            const std::string path = "/v1/jobs/" + job_id + "/result?wait=true&timeout_ms=" +
                                     std::to_string(int64_t(config.long_poll_ms));
            try {
                return result_from_json(request("GET", path, "", config.long_poll_ms));
            } catch (const QorchError& e) {
                if (e.code != "timeout") throw;
                if (std::chrono::steady_clock::now() >= deadline)
                    throw QorchError("timeout", "job " + job_id + " did not finish within " +
                                                    std::to_string(config.total_timeout_ms) +
                                                    " ms");
            }
            std::this_thread::sleep_for(
                std::chrono::duration<double, std::milli>(config.poll_interval_ms));
        }
    }
};

struct Client::AsyncHandle::State {
    std::shared_ptr<Impl> impl;
    std::string job_id;
    std::mutex mu;
    bool resolved = false;
    std::optional<ExecutionResult> result;
    std::string error_code;
    std::string error_message;
};

Client::AsyncHandle::AsyncHandle(std::shared_ptr<State> state) : state_(std::move(state)) {}
Client::AsyncHandle::~AsyncHandle() = default;
Client::AsyncHandle::AsyncHandle(AsyncHandle&&) noexcept = default;
Client::AsyncHandle& Client::AsyncHandle::operator=(AsyncHandle&&) noexcept = default;

const std::string& Client::AsyncHandle::job_id() const { return state_->job_id; }

ExecutionResult Client::AsyncHandle::await() {
    std::lock_guard lock(state_->mu); // a concurrent second await blocks, then re-reads
    if (!state_->resolved) {
        try {
            state_->result = state_->impl->wait_result(state_->job_id);
        } catch (const QorchError& e) {
            if (e.code == "timeout") throw; // not terminal yet; await may be retried
            state_->error_code = e.code;
            state_->error_message = e.what();
        }
        state_->resolved = true;
    }
    if (state_->result) return *state_->result;
    throw QorchError(state_->error_code, state_->error_message);
}

Client::Client(ClientConfig config) : impl_(std::make_shared<Impl>()) {
    impl_->config = std::move(config);
}

Client::~Client() = default;

ExecutionResult Client::execute(const Circuit& circuit, std::optional<uint64_t> shots,
                                std::optional<BackendSelector> selector, uint64_t seed) {
    return impl_->wait_result(impl_->submit(impl_->job_json(circuit, shots, selector, seed)));
}

Client::AsyncHandle Client::execute_async(const Circuit& circuit, std::optional<uint64_t> shots,
                                          std::optional<BackendSelector> selector,
                                          uint64_t seed) {
    auto state = std::make_shared<AsyncHandle::State>();
    state->impl = impl_;
    state->job_id = impl_->submit(impl_->job_json(circuit, shots, selector, seed));
    return AsyncHandle(std::move(state));
}

std::vector<ResultOrError> Client::execute_many(const std::vector<Circuit>& circuits,
                                                std::optional<uint64_t> shots,
                                                std::optional<BackendSelector> selector,
                                                uint64_t seed) {
    if (circuits.empty()) return {};
    json jobs = json::array();
    for (const auto& circuit : circuits)
        jobs.push_back(impl_->job_json(circuit, shots, selector, seed));
    const json reply = impl_->request("POST", "/v1/jobs/batch",
                                      json{{"jobs", jobs}}.dump(), 10000, 201);
    std::vector<std::string> ids = reply.at("job_ids").get<std::vector<std::string>>();

    std::vector<ResultOrError> out(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        try {
            out[i].result = impl_->wait_result(ids[i]);
        } catch (const QorchError& e) {
            out[i].error_code = e.code;
            out[i].error_message = e.what();
        }
    }
    return out;
}

std::vector<std::string> Client::backend_names() {
    const json reply = impl_->request("GET", "/v1/backends");
    std::vector<std::string> names;
    for (const auto& desc : reply.at("backends")) names.push_back(desc.at("name"));
    return names;
}

void Client::cancel(const std::string& job_id) {
    impl_->request("DELETE", "/v1/jobs/" + job_id);
}

void Client::shutdown_server(bool drain) {
    impl_->request("POST", "/v1/shutdown", json{{"drain", drain}}.dump(), 10000, 202);
}

ClientConfig parse_endpoint(const std::string& endpoint) {
    ClientConfig config;
    std::string text = endpoint;
    if (text.rfind("http://", 0) == 0) text = text.substr(7);
    const auto colon = text.rfind(':');
    std::string port_text;
    if (colon == std::string::npos) {
        port_text = text; // bare port
    } else {
        if (colon > 0) config.host = text.substr(0, colon);
        port_text = text.substr(colon + 1);
    }
    try {
        size_t used = 0;
        config.port = std::stoi(port_text, &used);
        if (used != port_text.size() || config.port < 1 || config.port > 65535)
            throw std::invalid_argument(port_text);
    } catch (const std::exception&) {
        throw QorchError("bad-endpoint", "cannot parse endpoint: " + endpoint);
    }
    return config;
}

} // namespace qorch
