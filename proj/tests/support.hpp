#pragma once

// Shared helpers for the test suites: independent oracles and generators.
// Everything here is deliberately naive -- these are the references the
// engines are checked against, so they must not share code paths with them.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "qorch/circuit.hpp"

namespace testsupport {

using qorch::Circuit;
using qorch::GateKind;
using qorch::GateOp;
using cplx = std::complex<double>;

/// Full 2^n x 2^n matrix of a gate op via Kronecker products -- the naive
/// construction the stride kernels are checked against.
inline Eigen::MatrixXcd full_matrix(const GateOp& op, int n) {
    const size_t dim = size_t{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    if (op.qubits.size() == 1) {
        const auto g = qorch::gate_matrix_1q(op.kind, op.params);
        const int q = op.qubits[0];
        for (size_t col = 0; col < dim; ++col) {
            const int bit = (col >> q) & 1;
            for (int row_bit = 0; row_bit < 2; ++row_bit) {
                const size_t row = (col & ~(size_t{1} << q)) | (size_t(row_bit) << q);
                m(row, col) += g[row_bit * 2 + bit];
            }
        }
    } else {
        const auto g = qorch::gate_matrix_2q(op.kind, op.params);
        const int qa = op.qubits[0], qb = op.qubits[1];
        for (size_t col = 0; col < dim; ++col) {
            const int ca = (col >> qa) & 1, cb = (col >> qb) & 1;
            for (int ra = 0; ra < 2; ++ra)
                for (int rb = 0; rb < 2; ++rb) {
                    size_t row = col & ~((size_t{1} << qa) | (size_t{1} << qb));
                    row |= (size_t(ra) << qa) | (size_t(rb) << qb);
                    m(row, col) += g[(ra * 2 + rb) * 4 + (ca * 2 + cb)];
                }
        }
    }
    return m;
}

/// Final amplitudes from multiplying full matrices -- exponential, test only.
inline Eigen::VectorXcd run_full_matrix(const Circuit& c) {
    const size_t dim = size_t{1} << c.num_qubits;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi[0] = 1.0;
    for (const auto& op : c.ops) psi = full_matrix(op, c.num_qubits) * psi;
    return psi;
}

inline const std::vector<GateKind>& all_kinds() {
    static const std::vector<GateKind> kinds = {
        GateKind::H,   GateKind::X,   GateKind::Y,    GateKind::Z,
        GateKind::S,   GateKind::Sdg, GateKind::T,    GateKind::Tdg,
        GateKind::RX,  GateKind::RY,  GateKind::RZ,   GateKind::CX,
        GateKind::CZ,  GateKind::RZZ, GateKind::SWAP, GateKind::CRY,
        GateKind::CP};
    return kinds;
}

/// Random circuit over the full gate set, all qubits measured.
inline Circuit random_circuit(std::mt19937_64& rng, int n, int depth) {
    std::uniform_int_distribution<size_t> kind_pick(0, all_kinds().size() - 1);
    std::uniform_int_distribution<int> qubit_pick(0, n - 1);
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);

    Circuit c;
    c.num_qubits = n;
    for (int d = 0; d < depth; ++d) {
        GateKind k = all_kinds()[kind_pick(rng)];
        if (n < 2 && qorch::gate_arity(k) == 2) {
            k = GateKind::H;
        }
        GateOp op;
        op.kind = k;
        op.qubits.push_back(qubit_pick(rng));
        if (qorch::gate_arity(k) == 2) {
            int q2 = qubit_pick(rng);
            while (q2 == op.qubits[0]) q2 = qubit_pick(rng);
            op.qubits.push_back(q2);
        }
        if (qorch::gate_has_angle(k)) op.params.push_back(angle(rng));
        c.ops.push_back(std::move(op));
    }
    for (int q = 0; q < n; ++q) c.measured_qubits.push_back(q);
    return c;
}

/// Total-variation distance between two count maps.
inline double tv_distance(const std::map<std::string, uint64_t>& a,
                          const std::map<std::string, uint64_t>& b) {
    uint64_t na = 0, nb = 0;
    for (const auto& [k, v] : a) na += v;
    for (const auto& [k, v] : b) nb += v;
    double tv = 0;
    auto get = [](const std::map<std::string, uint64_t>& m, const std::string& k) {
        auto it = m.find(k);
        return it == m.end() ? uint64_t{0} : it->second;
    };
    std::map<std::string, bool> keys;
    for (const auto& [k, v] : a) keys[k] = true;
    for (const auto& [k, v] : b) keys[k] = true;
    for (const auto& [k, unused] : keys)
        tv += std::abs(double(get(a, k)) / na - double(get(b, k)) / nb);
    return tv / 2;
}

/// TV distance between counts and an exact distribution over basis indices,
/// marginalized to the measured qubits.
inline double tv_vs_exact(const std::map<std::string, uint64_t>& counts,
                          const std::vector<double>& probs,
                          const std::vector<int>& measured) {
    uint64_t shots = 0;
    for (const auto& [k, v] : counts) shots += v;
    std::map<std::string, double> exact;
    std::string key(measured.size(), '0');
    for (size_t i = 0; i < probs.size(); ++i) {
        for (size_t j = 0; j < measured.size(); ++j)
            key[j] = ((i >> measured[j]) & 1) ? '1' : '0';
        exact[key] += probs[i];
    }
    double tv = 0;
    for (const auto& [k, p] : exact) {
        auto it = counts.find(k);
        const double e = it == counts.end() ? 0.0 : double(it->second) / shots;
        tv += std::abs(p - e);
    }
    for (const auto& [k, v] : counts)
        if (!exact.count(k)) tv += double(v) / shots;
    return tv / 2;
}

} // namespace testsupport
