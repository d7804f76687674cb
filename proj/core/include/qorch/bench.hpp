#pragma once

#include <functional>

#include "qorch/qaoa.hpp"

namespace qorch {

/// One grid cell execution (or one variational timeline sample).
struct BenchRow {
    std::string workload;
    int size = 0;
    std::string backend;
    std::string subbackend;
    uint64_t shots = 0;
    int rep = 0;
    double wall_ms = 0;
    double queue_ms = 0;
    double exec_ms = 0;
    std::optional<double> fidelity;
    std::map<std::string, std::string> extra;
    std::string error_code; // nonempty marks a failed cell; timings then 0
};

/// Fixed schema:
/// workload,size,backend,subbackend,shots,rep,wall_ms,queue_ms,exec_ms,fidelity,extra_json,error_code
std::string bench_csv_header();
std::string bench_csv_line(const BenchRow& row);
BenchRow bench_csv_parse(const std::string& line);
void save_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);
std::vector<BenchRow> load_bench_csv(const std::string& path);

/// "4,8,12" and "4..24:4" (inclusive range with stride; default stride 1).
std::vector<int> parse_sizes(const std::string& text);

/// "mps" or "mps:mps-chi64".
BackendSelector parse_backend_spec(const std::string& text);

/// Benchmark circuit families; `size` follows each family's convention
/// (ghz/ham/tfim: qubit count; hhl: total qubits, odd).
Circuit build_workload(const std::string& workload, int size);

struct GridSpec {
    std::string workload = "ghz";
    std::vector<int> sizes;
    std::vector<BackendSelector> backends;
    uint64_t shots = 1024;
    int reps = 3;
    uint64_t seed = 1;
    double walltime_guard_ms = 120000; // cells over budget emit error rows
    int parallel_cells = 1;
};

/// Produces the execution surface for one backend selector; lets the grid
/// run the same workloads in-process or against a remote orchestrator.
using ExecutorFactory = std::function<std::unique_ptr<Executor>(const BackendSelector&)>;

/// Runs the full (sizes x backends x reps) grid; failed cells become
/// error-coded rows and the grid continues. Once a (size, backend) cell
/// exceeds the walltime guard its remaining reps are skipped.
std::vector<BenchRow> run_grid(const GridSpec& spec, const ExecutorFactory& make_executor);

/// Console table: mean +/- std wall_ms per (workload, size, backend).
std::string summarize_grid(const std::vector<BenchRow>& rows);

struct CompareCell {
    int size = 0;
    std::string backend;
    double mean_wall_ms = 0;
    bool fastest = false;
};

/// Per-size per-backend mean wall_ms with the fastest backend flagged.
/// Throws when the backends were measured on different size sets.
std::vector<CompareCell> compare_rows(const std::vector<BenchRow>& rows);
std::string compare_table(const std::vector<CompareCell>& cells);

struct VariationalSpec {
    bool decomposed = false; // false = qaoa, true = dqaoa
    int size = 8;
    int p = 2;
    uint64_t shots = 1024;
    int max_evals = 150;
    uint64_t seed = 1;
    BackendSelector backend;
    // dqaoa only:
    int subqsize = 8;
    int nsubq = 4;
    int max_iters = 8;
    int patience = 3;
    int concurrency = 4;
};

struct VariationalOutcome {
    SolutionRecord record;
    std::vector<BenchRow> rows; // per-iteration timeline + one summary row
};

/// Solves a seeded random QUBO (density 0.5, entries in [-1, 1]) and emits
/// the timeline rows used for concurrency plots.
VariationalOutcome run_variational(const VariationalSpec& spec, Executor& exec);

/// SolutionRecord as a JSON document (bitstring, cost, fidelity, evals, log).
std::string solution_to_json(const SolutionRecord& record);

} // namespace qorch
