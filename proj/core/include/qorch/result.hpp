#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "qorch/circuit.hpp"

namespace qorch {

/// Names an execution engine and its variant plus runtime parameters.
/// Unknown property keys are rejected by the adapter, not ignored.
struct BackendSelector {
    std::string backend = "sv";
    std::string subbackend;
    std::map<std::string, std::string> properties;

    bool operator==(const BackendSelector&) const = default;
};

/// Job envelope: a circuit with everything needed to run it.
struct ExecutionRequest {
    Circuit circuit;
    uint64_t shots = 1024;
    BackendSelector selector;
    uint64_t seed = 0;
    std::optional<double> deadline_ms;
};

/// The unified return format shared by every backend. The field set is
/// identical regardless of which engine produced the result.
struct ExecutionResult {
    std::map<std::string, uint64_t> counts;
    uint64_t shots = 0;
    std::string backend;
    int worker_id = -1;
    double queue_ms = 0;
    double exec_ms = 0;
    uint64_t seed = 0;
};

/// Error with a stable machine-readable code, used across the wire protocol.
class QorchError : public std::runtime_error {
public:
    QorchError(std::string code, const std::string& message)
        : std::runtime_error(message), code(std::move(code)) {}
    std::string code;
};

} // namespace qorch
