#include "qorch/statevector.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "qorch/rng.hpp"

namespace qorch {

StateVector::StateVector(int num_qubits, int max_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1)
        throw QorchError("invalid-argument", "qubit count must be positive");
    if (num_qubits > max_qubits)
        throw QorchError("capacity",
                         "circuit needs " + std::to_string(num_qubits) +
                             " qubits, state-vector cap is " + std::to_string(max_qubits));
    amps_.assign(size_t{1} << num_qubits, cplx{});
    amps_[0] = 1.0;
}

void StateVector::apply(const GateOp& op) {
    for (int q : op.qubits)
        if (q < 0 || q >= num_qubits_)
            throw QorchError("invalid-argument", "qubit index out of range");
    if (op.qubits.size() == 1) {
        apply_1q(gate_matrix_1q(op.kind, op.params), op.qubits[0]);
    } else {
        apply_2q(gate_matrix_2q(op.kind, op.params), op.qubits[0], op.qubits[1]);
    }
}

void StateVector::apply_1q(const std::array<cplx, 4>& m, int target) {
    const size_t mask = size_t{1} << target;
    const size_t lo = mask - 1;
    const size_t hi = ~lo;
    const size_t half = amps_.size() >> 1;
    for (size_t i = 0; i < half; ++i) {
        const size_t i0 = ((i & hi) << 1) | (i & lo);
        const size_t i1 = i0 | mask;
        const cplx a0 = amps_[i0], a1 = amps_[i1];
        amps_[i0] = m[0] * a0 + m[1] * a1;
        amps_[i1] = m[2] * a0 + m[3] * a1;
    }
}

void StateVector::apply_2q(const std::array<cplx, 16>& m, int qa, int qb) {
    // qa is the high bit of the 2-bit matrix index.
    const size_t ma = size_t{1} << qa;
    const size_t mb = size_t{1} << qb;
    const int qlo = std::min(qa, qb), qhi = std::max(qa, qb);
    const size_t lo_mask = (size_t{1} << qlo) - 1;
    const size_t mid_mask = ((size_t{1} << (qhi - 1)) - 1) & ~lo_mask;
    const size_t hi_mask = ~(lo_mask | mid_mask);
    const size_t quarter = amps_.size() >> 2;
    for (size_t i = 0; i < quarter; ++i) {
        const size_t base = ((i & hi_mask) << 2) | ((i & mid_mask) << 1) | (i & lo_mask);
        const size_t i00 = base;
        const size_t i01 = base | mb;
        const size_t i10 = base | ma;
        const size_t i11 = base | ma | mb;
        const cplx a00 = amps_[i00], a01 = amps_[i01], a10 = amps_[i10], a11 = amps_[i11];
        amps_[i00] = m[0] * a00 + m[1] * a01 + m[2] * a10 + m[3] * a11;
        amps_[i01] = m[4] * a00 + m[5] * a01 + m[6] * a10 + m[7] * a11;
        amps_[i10] = m[8] * a00 + m[9] * a01 + m[10] * a10 + m[11] * a11;
        amps_[i11] = m[12] * a00 + m[13] * a01 + m[14] * a10 + m[15] * a11;
    }
}

double StateVector::norm_sq() const {
    double s = 0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
}

double StateVector::expectation_zi(const std::string& pauli) const {
    if (static_cast<int>(pauli.size()) != num_qubits_)
        throw QorchError("invalid-argument", "Pauli string length mismatch");
    size_t zmask = 0;
    for (int q = 0; q < num_qubits_; ++q) {
        char c = pauli[q];
        if (c == 'Z' || c == 'z')
            zmask |= size_t{1} << q;
        else if (c != 'I' && c != 'i')
            throw QorchError("invalid-argument", "Pauli string letters must be I or Z");
    }
    double e = 0;
    for (size_t i = 0; i < amps_.size(); ++i) {
        const double w = std::norm(amps_[i]);
        e += (std::popcount(i & zmask) & 1) ? -w : w;
    }
    return e;
}

std::map<std::string, uint64_t> StateVector::sample(const std::vector<int>& measured,
                                                    uint64_t shots, uint64_t seed) const {
    // single pass building the CDF, then one binary search per shot
    std::vector<double> cdf(amps_.size());
    double acc = 0;
    for (size_t i = 0; i < amps_.size(); ++i) {
        acc += std::norm(amps_[i]);
        cdf[i] = acc;
    }
    const double total = acc;

    Rng rng(seed);
    std::map<std::string, uint64_t> counts;
    std::string key(measured.size(), '0');
    for (uint64_t s = 0; s < shots; ++s) {
        const double r = rng.next_double() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        const size_t idx = std::min<size_t>(it - cdf.begin(), amps_.size() - 1);
        for (size_t j = 0; j < measured.size(); ++j)
            key[j] = ((idx >> measured[j]) & 1) ? '1' : '0';
        ++counts[key];
    }
    return counts;
}

ExecutionResult sv_run(const Circuit& c, uint64_t shots, uint64_t seed, int max_qubits,
                       const std::atomic<bool>* cancel) {
    require_valid(c);
    if (shots < 1) throw QorchError("invalid-argument", "shots must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    StateVector sv(c.num_qubits, max_qubits);
    for (const auto& op : c.ops) {
        if (cancel && cancel->load(std::memory_order_relaxed))
            throw QorchError("cancelled", "execution cancelled");
        sv.apply(op);
    }
    ExecutionResult res;
    res.counts = sv.sample(c.measured_qubits, shots, seed);
    res.shots = shots;
    res.seed = seed;
    res.backend = "sv";
    res.exec_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace qorch
