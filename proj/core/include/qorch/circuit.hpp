#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qorch {

enum class GateKind {
    H, X, Y, Z, S, Sdg, T, Tdg, RX, RY, RZ,   // one-qubit
    CX, CZ, RZZ, SWAP, CRY, CP                // two-qubit
};

const char* gate_name(GateKind k);
std::optional<GateKind> gate_from_name(const std::string& name);

inline int gate_arity(GateKind k) {
    return k >= GateKind::CX ? 2 : 1;
}

inline bool gate_has_angle(GateKind k) {
    switch (k) {
    case GateKind::RX: case GateKind::RY: case GateKind::RZ:
    case GateKind::RZZ: case GateKind::CRY: case GateKind::CP:
        return true;
    default:
        return false;
    }
}

/// A single gate application. `qubits` has 1 or 2 entries matching the kind's
/// arity; rotation kinds carry exactly one angle in radians.
struct GateOp {
    GateKind kind;
    std::vector<int> qubits;
    std::vector<double> params;

    static GateOp one(GateKind k, int q) { return {k, {q}, {}}; }
    static GateOp one(GateKind k, int q, double angle) { return {k, {q}, {angle}}; }
    static GateOp two(GateKind k, int a, int b) { return {k, {a, b}, {}}; }
    static GateOp two(GateKind k, int a, int b, double angle) { return {k, {a, b}, {angle}}; }

    bool operator==(const GateOp& o) const = default;
};

/// The standardized circuit description every backend accepts. Immutable by
/// convention after construction; safe to share across threads.
struct Circuit {
    int num_qubits = 0;
    std::vector<GateOp> ops;
    std::vector<int> measured_qubits;
    std::string name;

    bool operator==(const Circuit& o) const {
        return num_qubits == o.num_qubits && ops == o.ops &&
               measured_qubits == o.measured_qubits;
    }
};

/// Parse failure with 1-based position information.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

/// Parses the QASM-subset dialect: `qreg q[N];` first, then gate statements
/// like `h q[0];` / `rzz(1.5) q[0],q[1];`, and `measure q;` or `measure q[i];`.
/// `//` comments and arbitrary whitespace are allowed.
Circuit parse_circuit_text(const std::string& text);

/// Inverse of parse_circuit_text. Angles are printed with 17 significant
/// digits so round-trips are bit-faithful.
std::string serialize_circuit(const Circuit& c);

/// Returns every invariant violation (empty means valid).
std::vector<std::string> validate(const Circuit& c);

/// Convenience: throws std::invalid_argument listing all violations.
void require_valid(const Circuit& c);

using cplx = std::complex<double>;

/// Column-major-free dense matrices of the gates, row-major, in the
/// computational basis. For two-qubit kinds the basis index is
/// q_first * 2 + q_second, i.e. qubits[0] is the high bit (the control for
/// CX/CZ/CRY/CP).
std::array<cplx, 4> gate_matrix_1q(GateKind k, const std::vector<double>& params);
std::array<cplx, 16> gate_matrix_2q(GateKind k, const std::vector<double>& params);

/// The inverse op (every kind in the set has one within the set).
GateOp inverse_op(const GateOp& op);

} // namespace qorch
