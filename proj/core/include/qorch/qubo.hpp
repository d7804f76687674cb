#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace qorch {

/// Quadratic unconstrained binary optimization instance: cost(x) = x^T Q x
/// over binary vectors, with Q symmetric (diagonal = linear terms).
struct QuboProblem {
    int size = 0;
    std::vector<double> q; // row-major size x size, symmetric

    double& at(int i, int j) { return q[size_t(i) * size + j]; }
    double at(int i, int j) const { return q[size_t(i) * size + j]; }

    static QuboProblem zeros(int n) { return {n, std::vector<double>(size_t(n) * n, 0.0)}; }

    /// Throws unless Q is symmetric within 1e-12.
    void check_symmetric() const;
};

double qubo_cost(const QuboProblem& q, const std::vector<uint8_t>& x);

struct BruteForceResult {
    std::vector<uint8_t> best_x;
    double best_cost = 0;
    double worst_cost = 0;
};

/// Exhaustive minimum/maximum; ties broken by lexicographically smallest
/// bitstring (x[0] most significant for the comparison). N capped at 24.
BruteForceResult brute_force(const QuboProblem& q);

/// Sub-QUBO over `indices`, clamped to `current_x`: couplings among selected
/// variables are copied, couplings to outside variables fold into the
/// diagonal so that cost differences are preserved.
QuboProblem extract_subqubo(const QuboProblem& q, const std::vector<uint8_t>& current_x,
                            const std::vector<int>& indices);

/// Normalized solution quality (worst - found) / (worst - best), clamped to
/// [0, 1]; defined as 1 when worst == best.
double solution_fidelity(double found_cost, double best_cost, double worst_cost);

/// Seeded random symmetric instance: entries uniform in [-1, 1], the given
/// fraction of off-diagonal pairs nonzero.
QuboProblem random_qubo(int n, uint64_t seed, double density = 0.5);

/// JSON file format: {"size": N, "entries": [[i, j, value], ...]} with
/// symmetric completion applied on load.
QuboProblem load_qubo_json(const std::string& path);
void save_qubo_json(const QuboProblem& q, const std::string& path);

} // namespace qorch
