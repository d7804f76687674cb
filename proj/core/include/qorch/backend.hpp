#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <vector>

#include "qorch/result.hpp"

namespace qorch {

enum class Locality { local, remote };

/// Capability card for one registered execution engine.
struct BackendDescriptor {
    std::string name;
    std::vector<std::string> subbackends;
    int max_qubits = 0;
    Locality locality = Locality::local;
    std::string notes;
};

/// One execution engine behind the uniform adapter contract. A single call
/// covers the whole lifecycle: accept the circuit, apply the selector's
/// runtime parameters, run, and marshal the counts into ExecutionResult.
/// Adapters must be safe to call concurrently from multiple workers.
class BackendAdapter {
public:
    virtual ~BackendAdapter() = default;
    virtual BackendDescriptor descriptor() const = 0;
    virtual ExecutionResult execute(const ExecutionRequest& request,
                                    const std::atomic<bool>* cancel = nullptr) = 0;
};

/// Name-keyed adapter collection. Registration happens at startup; lookups
/// are read-mostly and thread safe.
class BackendRegistry {
public:
    /// Throws QorchError("duplicate-backend") when the name is taken.
    void add(std::shared_ptr<BackendAdapter> adapter);

    /// nullptr when no adapter has that name.
    std::shared_ptr<BackendAdapter> find(const std::string& name) const;

    /// Descriptors in registration order.
    std::vector<BackendDescriptor> list() const;

    /// Registry with the built-in local engines: sv then mps.
    static BackendRegistry with_local_backends();

private:
    // Behind a pointer so the registry stays movable.
    std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
    std::vector<std::shared_ptr<BackendAdapter>> adapters_;
};

std::shared_ptr<BackendAdapter> make_sv_adapter();
std::shared_ptr<BackendAdapter> make_mps_adapter();

/// Resolves the selector against the registry and runs the request.
/// queue_ms is always 0 on this direct path.
ExecutionResult adapter_execute(const BackendRegistry& registry, const ExecutionRequest& request,
                                const std::atomic<bool>* cancel = nullptr);

} // namespace qorch
