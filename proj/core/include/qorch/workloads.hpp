#pragma once

#include <Eigen/Dense>
#include <string>

#include "qorch/circuit.hpp"

namespace qorch {

/// Transverse-field Ising evolution parameters.
struct TfimSpec {
    int n = 2;
    double coupling = 1.0;        // J
    double field = 1.0;           // h
    double time = 1.0;            // total evolution time
    int steps = 1;                // Trotter steps
    bool periodic = false;

    static TfimSpec defaults(int n) {
        return {n, 1.0, 1.0, 1.0, std::max(1, (n + 3) / 4), false};
    }
};

/// Linear system instance for the quantum solver benchmark. If
/// evolution_time <= 0 it is chosen automatically so the rescaled
/// eigenvalues land as close as possible to the clock grid.
struct HhlProblem {
    Eigen::MatrixXcd a;           // Hermitian, dimension 2^n_b
    Eigen::VectorXcd b;           // normalized, dimension 2^n_b
    int n_clock = 4;
    double evolution_time = 0;    // t0; auto when <= 0
    double rotation_constant = 0; // C; auto when <= 0
};

/// H + CX chain, all qubits measured; depth linear in n.
Circuit build_ghz(int n);

/// Ising time-evolution benchmark in the transverse-basis framing:
/// H on all qubits, `steps` alternating ZZ/X rotation layers with unit
/// couplings and unit total time, H on all qubits, measure all.
Circuit build_ham(int n, int steps);

/// Trotterized transverse-field Ising evolution: per step, RZZ(2 J dt) on
/// each coupled pair then RX(2 h dt) on every qubit; measure all.
Circuit build_tfim(const TfimSpec& spec);

/// The Hamiltonian matrix build_tfim approximates the evolution of
/// (J * sum ZZ + h * sum X), used by convergence checks.
Eigen::MatrixXcd tfim_hamiltonian(const TfimSpec& spec);

/// Quantum linear solver circuit: state prep of b, phase estimation over
/// exp(i A t0) with n_clock bits, ancilla rotation RY(2 asin(C/lambda)),
/// inverse phase estimation. Qubits [0, n_b) hold the solution register,
/// then the clock, the ancilla last. Measured qubits: ancilla first, then
/// the solution register; post-select on the ancilla reading 1.
Circuit build_hhl(const HhlProblem& p);

/// Classical reference: |A^{-1} b|^2 normalized, index = little-endian
/// solution-register value.
Eigen::VectorXd hhl_classical_distribution(const HhlProblem& p);

/// The tridiagonal Hermitian Toeplitz benchmark family (diag 2, off-diag
/// -1/3) with b = last basis vector, sized for `total_qubits` = 2*n_b + 1.
HhlProblem hhl_benchmark_instance(int total_qubits);

/// Custom instances from JSON: {"A": [[re, im], ...] row-major,
/// "b": [[re, im], ...], "n_clock": optional}.
HhlProblem load_hhl_json(const std::string& path);

} // namespace qorch
