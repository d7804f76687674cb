#include "qorch/backend.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

#include "qorch/mps.hpp"
#include "qorch/statevector.hpp"

namespace qorch {

namespace {

double parse_property_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw QorchError("invalid-property", "property " + key + " is not a number: " + value);
    }
}

/// Shared per-call preamble: validate subbackend, reject unknown property
/// keys, and apply the optional "delay_ms" calibration stall.
void check_selector(const BackendDescriptor& desc, const BackendSelector& selector,
                    const std::vector<std::string>& known_properties) {
    if (!selector.subbackend.empty()) {
        const auto& subs = desc.subbackends;
        if (std::find(subs.begin(), subs.end(), selector.subbackend) == subs.end())
            throw QorchError("unknown-subbackend",
                             "backend " + desc.name + " has no subbackend " + selector.subbackend);
    }
    for (const auto& [key, value] : selector.properties) {
        (void)value;
        if (std::find(known_properties.begin(), known_properties.end(), key) ==
            known_properties.end())
            throw QorchError("unknown-property",
                             "backend " + desc.name + " rejects property " + key);
    }
}

void apply_delay_property(const BackendSelector& selector) {
    const auto it = selector.properties.find("delay_ms");
    if (it == selector.properties.end()) return;
    const double ms = parse_property_double("delay_ms", it->second);
    if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

class SvAdapter : public BackendAdapter {
public:
    BackendDescriptor descriptor() const override {
        return {"sv", {"statevector"}, StateVector::kDefaultMaxQubits, Locality::local,
                "dense statevector simulator"};
    }

    ExecutionResult execute(const ExecutionRequest& request,
                            const std::atomic<bool>* cancel) override {
        check_selector(descriptor(), request.selector, {"delay_ms"});
        const auto start = std::chrono::steady_clock::now();
        apply_delay_property(request.selector);
        try {
            auto result = sv_run(request.circuit, request.shots, request.seed,
                                 StateVector::kDefaultMaxQubits, cancel);
            result.exec_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            return result;
        } catch (const QorchError& e) {
            if (e.code == "cancelled") throw;
            throw QorchError(e.code, std::string("sv: ") + e.what());
        }
    }
};

class MpsAdapter : public BackendAdapter {
public:
    static constexpr int kMaxQubits = 64;

    BackendDescriptor descriptor() const override {
        return {"mps",
                {"mps-chi16", "mps-chi32", "mps-chi64", "mps-chi128"},
                kMaxQubits,
                Locality::local,
                "matrix-product-state simulator with bond truncation"};
    }

    ExecutionResult execute(const ExecutionRequest& request,
                            const std::atomic<bool>* cancel) override {
        check_selector(descriptor(), request.selector, {"chi_max", "trunc_threshold", "delay_ms"});
        if (request.circuit.num_qubits > kMaxQubits)
            throw QorchError("capacity", "mps: circuit exceeds " +
                                                      std::to_string(kMaxQubits) + " qubits");
        MpsOptions opt;
        // The "mps-chiN" subbackends are presets; explicit properties win.
        if (!request.selector.subbackend.empty())
            opt.chi_max = std::stoi(request.selector.subbackend.substr(7));
        const auto& props = request.selector.properties;
        if (auto it = props.find("chi_max"); it != props.end()) {
            opt.chi_max = int(parse_property_double("chi_max", it->second));
            if (opt.chi_max < 1) throw QorchError("invalid-property", "chi_max must be >= 1");
        }
        if (auto it = props.find("trunc_threshold"); it != props.end())
            opt.trunc_threshold = parse_property_double("trunc_threshold", it->second);
        const auto start = std::chrono::steady_clock::now();
        apply_delay_property(request.selector);
        try {
            auto result = mps_run(request.circuit, request.shots, request.seed, opt, cancel);
            result.exec_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            return result;
        } catch (const QorchError& e) {
            if (e.code == "cancelled") throw;
            throw QorchError(e.code, std::string("mps: ") + e.what());
        }
    }
};

} // namespace

void BackendRegistry::add(std::shared_ptr<BackendAdapter> adapter) {
    const std::string name = adapter->descriptor().name;
    std::lock_guard lock(*mu_);
    for (const auto& existing : adapters_)
        if (existing->descriptor().name == name)
            throw QorchError("duplicate-backend", "backend already registered: " + name);
    adapters_.push_back(std::move(adapter));
}

std::shared_ptr<BackendAdapter> BackendRegistry::find(const std::string& name) const {
    std::lock_guard lock(*mu_);
    for (const auto& adapter : adapters_)
        if (adapter->descriptor().name == name) return adapter;
    return nullptr;
}

std::vector<BackendDescriptor> BackendRegistry::list() const {
    std::lock_guard lock(*mu_);
    std::vector<BackendDescriptor> out;
    out.reserve(adapters_.size());
    for (const auto& adapter : adapters_) out.push_back(adapter->descriptor());
    return out;
}

BackendRegistry BackendRegistry::with_local_backends() {
    BackendRegistry registry;
    registry.add(make_sv_adapter());
    registry.add(make_mps_adapter());
    return registry;
}

std::shared_ptr<BackendAdapter> make_sv_adapter() { return std::make_shared<SvAdapter>(); }
std::shared_ptr<BackendAdapter> make_mps_adapter() { return std::make_shared<MpsAdapter>(); }

ExecutionResult adapter_execute(const BackendRegistry& registry, const ExecutionRequest& request,
                                const std::atomic<bool>* cancel) {
    auto adapter = registry.find(request.selector.backend);
    if (!adapter)
        throw QorchError("unknown-backend", "no such backend: " + request.selector.backend);
    auto result = adapter->execute(request, cancel);
    result.queue_ms = 0;
    return result;
}

} // namespace qorch
