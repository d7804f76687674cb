#pragma once

#include <atomic>
#include <complex>
#include <vector>

#include "qorch/circuit.hpp"
#include "qorch/result.hpp"

namespace qorch {

/// Dense 2^n-amplitude simulator. Gate application is in-place stride-based
/// pair updates; no full gate matrix is ever materialized. Qubit k maps to
/// bit (1 << k) of the amplitude index.
class StateVector {
public:
    static constexpr int kDefaultMaxQubits = 26;

    explicit StateVector(int num_qubits, int max_qubits = kDefaultMaxQubits);

    int num_qubits() const { return num_qubits_; }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    std::vector<cplx>& amplitudes() { return amps_; }

    void apply(const GateOp& op);

    /// Current squared-norm (should stay within 1e-10 of 1).
    double norm_sq() const;

    /// |amplitude|^2 for every basis state.
    std::vector<double> probabilities() const;

    /// <psi| P |psi> for a Pauli string over {I, Z}; length must equal n.
    double expectation_zi(const std::string& pauli) const;

    /// Inverse-CDF sampling of `measured` qubit values, `shots` times.
    /// Returns bitstring -> count; character j of a key is the value of
    /// measured[j]. Deterministic for a fixed seed.
    std::map<std::string, uint64_t> sample(const std::vector<int>& measured,
                                           uint64_t shots, uint64_t seed) const;

private:
    void apply_1q(const std::array<cplx, 4>& m, int target);
    void apply_2q(const std::array<cplx, 16>& m, int qa, int qb);

    int num_qubits_;
    std::vector<cplx> amps_;
};

/// Runs a circuit end-to-end on a fresh state: apply all ops, then sample the
/// measured qubits. `cancel`, when set, is polled between gates and aborts
/// with a QorchError("cancelled").
ExecutionResult sv_run(const Circuit& c, uint64_t shots, uint64_t seed,
                       int max_qubits = StateVector::kDefaultMaxQubits,
                       const std::atomic<bool>* cancel = nullptr);

} // namespace qorch
