#pragma once

#include <memory>

#include "qorch/backend.hpp"
#include "qorch/client.hpp"
#include "qorch/qubo.hpp"

namespace qorch {

struct OptimizerSpec {
    std::string method = "nelder-mead"; // the only built-in method
    int max_evals = 150;
    double tolerance = 1e-3; // simplex value-spread stop
    uint64_t seed = 1;
};

struct QaoaParams {
    int p = 2;
    std::vector<double> gammas; // initial angles; empty = default schedule
    std::vector<double> betas;
    uint64_t shots = 1024;
    OptimizerSpec optimizer;
};

struct DqaoaConfig {
    int subqsize = 8;
    int nsubq = 4;
    int max_iters = 8;
    int no_improve_patience = 3;
    int concurrency = 4;
    uint64_t seed = 1;
};

struct IterationEntry {
    double cost = 0;
    double wall_ms = 0;
    int jobs_in_flight = 0; // high-water mark observed during the entry
};

struct SolutionRecord {
    std::vector<uint8_t> bitstring;
    double cost = 0;
    double fidelity = -1; // -1 when the brute-force reference is out of reach
    uint64_t evals = 0;
    std::vector<IterationEntry> iteration_log;
};

/// Execution surface the variational loop needs: one circuit in, sampled
/// counts out. Implementations must be callable from multiple threads.
class Executor {
public:
    virtual ~Executor() = default;
    virtual ExecutionResult run(const Circuit& circuit, uint64_t shots, uint64_t seed) = 0;
};

/// In-process execution through a backend registry.
std::unique_ptr<Executor> make_local_executor(BackendSelector selector = {});

/// Execution over the wire through an orchestrator client. The client must
/// outlive the executor.
std::unique_ptr<Executor> make_client_executor(Client& client, BackendSelector selector = {});

/// Layered cost-mixer ansatz for the Ising-mapped QUBO: H on all qubits,
/// then per layer the RZ/RZZ phase separation for exp(-i gamma H_cost)
/// followed by RX(2 beta) mixers. All qubits measured.
Circuit build_qaoa_circuit(const QuboProblem& q, const std::vector<double>& gammas,
                           const std::vector<double>& betas);

/// Seeded Nelder-Mead over the 2p angles, minimizing the mean sampled cost.
/// Returns the best-seen bitstring across every evaluation. The iteration
/// log holds one entry per circuit evaluation.
SolutionRecord qaoa_solve(const QuboProblem& q, const QaoaParams& params, Executor& exec);

/// Decompose / solve-concurrently / merge loop: each iteration draws
/// cfg.nsubq random (possibly overlapping) variable subsets of size
/// cfg.subqsize, solves the clamped sub-QUBOs with up to cfg.concurrency
/// sub-solves in flight, and greedily merges candidates in ascending cost
/// order under strict full-objective improvement. The iteration log holds
/// one entry per outer iteration; the incumbent cost is non-increasing.
SolutionRecord dqaoa_solve(const QuboProblem& q, const DqaoaConfig& cfg,
                           const QaoaParams& qparams, Executor& exec);

} // namespace qorch
