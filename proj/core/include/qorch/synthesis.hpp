#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qorch/circuit.hpp"

namespace qorch::synth {

/// Appends gates implementing diag(exp(i * phases[x])) on `qubits`, where bit
/// j of x is the value of qubits[j]. Exact up to one global phase. Cost is
/// O(2^q) rotations via a Walsh-Hadamard expansion into Z-product terms.
void append_diagonal(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                     const std::vector<double>& phases);

/// Multiplexed RY: rotates `target` by RY(angles[c]) for each assignment c of
/// the control qubits (bit j of c = controls[j]). 2^k CX + 2^k RY.
void append_multiplexed_ry(std::vector<GateOp>& ops, const std::vector<int>& controls,
                           int target, const std::vector<double>& angles);

/// Single-qubit unitary controlled on an exact assignment of `controls`
/// (bit j of `polarity` = required value of controls[j]).
void append_controlled_1q(std::vector<GateOp>& ops, const std::vector<int>& controls,
                          size_t polarity, int target, const Eigen::Matrix2cd& u);

/// Arbitrary unitary on the given qubits (bit j of the basis index = value of
/// qubits[j]), exact up to global phase, via two-level (Givens) decomposition
/// with Gray-code routing. Cost grows as ~8^q; intended for small registers.
void append_unitary(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                    const Eigen::MatrixXcd& u);

/// Prepares sum_x v[x] |x> from |0...0> on the given qubits, up to global
/// phase. v must be normalized.
void append_state_prep(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                       const Eigen::VectorXcd& v);

/// Quantum Fourier transform |x> -> d^{-1/2} sum_y exp(2*pi*i*x*y/d) |y>,
/// with qubits[0] the least significant bit, and its inverse.
void append_qft(std::vector<GateOp>& ops, const std::vector<int>& qubits);
void append_iqft(std::vector<GateOp>& ops, const std::vector<int>& qubits);

} // namespace qorch::synth
