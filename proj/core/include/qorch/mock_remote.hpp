#pragma once

#include <memory>
#include <string>

#include "qorch/backend.hpp"
#include "qorch/rng.hpp"

namespace qorch {

/// One latency distribution, in milliseconds.
struct DelaySpec {
    enum class Kind { fixed, uniform, lognormal };
    Kind kind = Kind::fixed;
    double a = 0; // fixed: value; uniform: low; lognormal: mu
    double b = 0; // uniform: high; lognormal: sigma

    double sample_ms(Rng& rng) const;
    std::string to_string() const;
};

/// Parses "fixed:300", "uniform:10,50", or "lognormal:5.5,0.6".
DelaySpec parse_delay_spec(const std::string& text);

/// Queue wait plus network transit. A profile string is either one delay
/// spec (queue only) or "QUEUE/NETWORK", e.g. "fixed:300/uniform:5,15".
struct LatencyProfile {
    DelaySpec queue;
    DelaySpec network;

    std::string to_string() const;
};

LatencyProfile parse_latency_profile(const std::string& text);

/// Loopback HTTP service emulating a cloud simulator endpoint. Accepts
/// POST /emu/v1/run with {"circuit": text, "shots": n, "seed": n} plus an
/// optional "deadline_ms", sleeps through the sampled queue and network
/// delays, runs the circuit on the sv engine, and answers
/// {"counts": {...}, "exec_ms": t, "queue_ms": q}. When the sampled delay
/// exceeds the request deadline it answers 504 after the deadline elapses.
class MockRemoteServer {
public:
    explicit MockRemoteServer(LatencyProfile profile = {}, uint64_t seed = 1);
    ~MockRemoteServer();
    MockRemoteServer(const MockRemoteServer&) = delete;
    MockRemoteServer& operator=(const MockRemoteServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    void start(int port = 0);
    void stop();
    int port() const;
    const LatencyProfile& profile() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Backend adapter that forwards requests to a MockRemoteServer endpoint.
/// A transport-level failure (connection refused, reset) is retried once;
/// an HTTP error answer, including the 504 deadline response, is not.
std::shared_ptr<BackendAdapter> make_mock_remote_adapter(const std::string& host, int port,
                                                         double default_timeout_ms = 30000);

} // namespace qorch
