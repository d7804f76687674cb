#include "qorch/mock_remote.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qorch/statevector.hpp"

namespace qorch {

using nlohmann::json;

double DelaySpec::sample_ms(Rng& rng) const {
    switch (kind) {
    case Kind::fixed:
        return a;
    case Kind::uniform:
        return a + (b - a) * rng.next_double();
    case Kind::lognormal: {
        // Box-Muller on the deterministic generator keeps replays exact
        // across platforms.
        const double u1 = std::max(rng.next_double(), 1e-300);
        const double u2 = rng.next_double();
        const double z = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
        return std::exp(a + b * z);
    }
    }
    return 0;
}

std::string DelaySpec::to_string() const {
    char buf[64];
    switch (kind) {
    case Kind::fixed:
        std::snprintf(buf, sizeof buf, "fixed:%g", a);
        break;
    case Kind::uniform:
        std::snprintf(buf, sizeof buf, "uniform:%g,%g", a, b);
        break;
    case Kind::lognormal:
        std::snprintf(buf, sizeof buf, "lognormal:%g,%g", a, b);
        break;
    }
    return buf;
}

DelaySpec parse_delay_spec(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw QorchError("invalid-latency", "delay spec needs kind:params, got " + text);
    const std::string kind = text.substr(0, colon);
    const std::string params = text.substr(colon + 1);
    auto number = [&](const std::string& s) {
        try {
            size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw QorchError("invalid-latency", "bad number in delay spec: " + text);
        }
    };
    DelaySpec spec;
    if (kind == "fixed") {
        spec.kind = DelaySpec::Kind::fixed;
        spec.a = number(params);
        if (spec.a < 0) throw QorchError("invalid-latency", "fixed delay must be >= 0");
        return spec;
    }
    const auto comma = params.find(',');
    if (comma == std::string::npos)
        throw QorchError("invalid-latency", kind + " needs two parameters: " + text);
    spec.a = number(params.substr(0, comma));
    spec.b = number(params.substr(comma + 1));
    if (kind == "uniform") {
        spec.kind = DelaySpec::Kind::uniform;
        if (spec.a < 0 || spec.b < spec.a)
            throw QorchError("invalid-latency", "uniform needs 0 <= low <= high");
    } else if (kind == "lognormal") {
        spec.kind = DelaySpec::Kind::lognormal;
        if (spec.b < 0) throw QorchError("invalid-latency", "lognormal sigma must be >= 0");
    } else {
        throw QorchError("invalid-latency", "unknown delay kind: " + kind);
    }
    return spec;
}

std::string LatencyProfile::to_string() const {
    return queue.to_string() + "/" + network.to_string();
}

LatencyProfile parse_latency_profile(const std::string& text) {
    LatencyProfile profile;
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        profile.queue = parse_delay_spec(text);
    } else {
        profile.queue = parse_delay_spec(text.substr(0, slash));
        profile.network = parse_delay_spec(text.substr(slash + 1));
    }
    return profile;
}

namespace {

void sleep_ms(double ms) {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

json error_body(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

} // namespace

struct MockRemoteServer::Impl {
    LatencyProfile profile;
    std::mutex rng_mu;
    Rng rng;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    Impl(LatencyProfile p, uint64_t seed) : profile(p), rng(seed) {
        server.Post("/emu/v1/run", [this](const httplib::Request& req, httplib::Response& res) {
            handle_run(req, res);
        });
    }

    void handle_run(const httplib::Request& req, httplib::Response& res) {
        json body;
        Circuit circuit;
        uint64_t shots = 0, seed = 0;
        double deadline_ms = 0;
        try {
            body = json::parse(req.body);
            circuit = parse_circuit_text(body.at("circuit").get<std::string>());
            shots = body.at("shots").get<uint64_t>();
            seed = body.value("seed", uint64_t{0});
            deadline_ms = body.value("deadline_ms", 0.0);
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(error_body("bad-request", e.what()).dump(), "application/json");
            return;
        }

        double queue_ms, network_ms;
        {
            std::lock_guard lock(rng_mu);
            queue_ms = profile.queue.sample_ms(rng);
            network_ms = profile.network.sample_ms(rng);
        }
        if (deadline_ms > 0 && queue_ms + network_ms > deadline_ms) {
            sleep_ms(deadline_ms);
            res.status = 504;
            res.set_content(
                error_body("deadline-exceeded", "simulated delay exceeded the deadline").dump(),
                "application/json");
            return;
        }
        sleep_ms(queue_ms);
        ExecutionResult result;
        try {
            result = sv_run(circuit, shots, seed);
        } catch (const QorchError& e) {
            res.status = 422;
            res.set_content(error_body(e.code, e.what()).dump(), "application/json");
            return;
        }
        sleep_ms(network_ms);
        json counts = json::object();
        for (const auto& [key, count] : result.counts) counts[key] = count;
        const json out{{"counts", counts}, {"exec_ms", result.exec_ms}, {"queue_ms", queue_ms}};
        res.set_content(out.dump(), "application/json");
    }
};

MockRemoteServer::MockRemoteServer(LatencyProfile profile, uint64_t seed)
    : impl_(std::make_unique<Impl>(profile, seed)) {}

MockRemoteServer::~MockRemoteServer() { stop(); }

void MockRemoteServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port < 0) throw QorchError("bind-failed", "could not bind a loopback port");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port))
            throw QorchError("bind-failed", "could not bind port " + std::to_string(port));
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void MockRemoteServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

int MockRemoteServer::port() const { return impl_->port; }
const LatencyProfile& MockRemoteServer::profile() const { return impl_->profile; }

namespace {

class MockRemoteAdapter : public BackendAdapter {
public:
    MockRemoteAdapter(std::string host, int port, double timeout_ms)
        : host_(std::move(host)), port_(port), timeout_ms_(timeout_ms) {}

    BackendDescriptor descriptor() const override {
        return {"mock-remote", {"simulator"}, StateVector::kDefaultMaxQubits, Locality::remote,
                "latency-injecting HTTP simulator at " + host_ + ":" + std::to_string(port_)};
    }

    ExecutionResult execute(const ExecutionRequest& request,
                            const std::atomic<bool>* cancel) override {
        (void)cancel; // in-flight remote calls run to completion
        for (const auto& [key, value] : request.selector.properties) {
            (void)value;
            throw QorchError("unknown-property", "backend mock-remote rejects property " + key);
        }
        if (!request.selector.subbackend.empty() && request.selector.subbackend != "simulator")
            throw QorchError("unknown-subbackend",
                             "mock-remote has no subbackend " + request.selector.subbackend);

        json body{{"circuit", serialize_circuit(request.circuit)},
                  {"shots", request.shots},
                  {"seed", request.seed}};
        const double timeout_ms = request.deadline_ms.value_or(timeout_ms_);
        if (request.deadline_ms) body["deadline_ms"] = *request.deadline_ms;

        httplib::Result res = post_once(body.dump(), timeout_ms);
        if (!res) res = post_once(body.dump(), timeout_ms); // retry transport errors once
        if (!res)
            throw QorchError("transport-error",
                             "mock-remote unreachable: " + httplib::to_string(res.error()));
        if (res->status != 200) {
            std::string code = "remote-error", message = res->body;
            try {
                const json err = json::parse(res->body).at("error");
                code = err.at("code").get<std::string>();
                message = err.at("message").get<std::string>();
            } catch (const std::exception&) {
            }
            throw QorchError(code, "mock-remote: " + message);
        }

        ExecutionResult result;
        try {
            const json out = json::parse(res->body);
            for (const auto& [key, count] : out.at("counts").items())
                result.counts[key] = count.get<uint64_t>();
            result.exec_ms = out.at("exec_ms").get<double>();
            result.queue_ms = out.value("queue_ms", 0.0);
        } catch (const std::exception& e) {
            throw QorchError("bad-response", std::string("mock-remote: ") + e.what());
        }
        result.shots = request.shots;
        result.seed = request.seed;
        result.backend = "mock-remote";
        return result;
    }

private:
    httplib::Result post_once(const std::string& body, double timeout_ms) {
        httplib::Client client(host_, port_);
        const auto usec = std::chrono::microseconds(int64_t(timeout_ms * 1000) + 500000);
        client.set_connection_timeout(usec);
        client.set_read_timeout(usec);
        return client.Post("/emu/v1/run", body, "application/json");
    }

    std::string host_;
    int port_;
    double timeout_ms_;
};

} // namespace

std::shared_ptr<BackendAdapter> make_mock_remote_adapter(const std::string& host, int port,
                                                         double default_timeout_ms) {
    return std::make_shared<MockRemoteAdapter>(host, port, default_timeout_ms);
}

} // namespace qorch
