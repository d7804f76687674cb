#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "qorch/bench.hpp"
#include "qorch/mock_remote.hpp"
#include "qorch/orchestrator.hpp"

#include <CLI11.hpp>

namespace {

using namespace qorch;

std::string endpoint_or_default(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QORCH_ENDPOINT"); env && *env) return env;
    return "127.0.0.1:8080";
}

/// Owns whichever execution stack (in-process registry or wire client) the
/// command selected, and hands out per-selector executors.
struct ExecutionStack {
    std::unique_ptr<Client> client;

    ExecutorFactory factory() {
        if (client)
            return [this](const BackendSelector& selector) {
                return make_client_executor(*client, selector);
            };
        return [](const BackendSelector& selector) { return make_local_executor(selector); };
    }
};

ExecutionStack make_stack(bool inproc, const std::string& endpoint_flag) {
    ExecutionStack stack;
    if (!inproc)
        stack.client = std::make_unique<Client>(parse_endpoint(endpoint_or_default(endpoint_flag)));
    return stack;
}

int cmd_serve(int port, int workers, const std::string& journal, uint64_t seed,
              const std::string& mock_latency) {
    auto registry = BackendRegistry::with_local_backends();
    std::unique_ptr<MockRemoteServer> remote;
    if (!mock_latency.empty()) {
        remote = std::make_unique<MockRemoteServer>(parse_latency_profile(mock_latency), seed);
        remote->start();
        registry.add(make_mock_remote_adapter("127.0.0.1", remote->port()));
        std::cout << "mock-remote endpoint on 127.0.0.1:" << remote->port() << " ("
                  << remote->profile().to_string() << ")\n";
    }
    ServiceConfig config;
    config.workers = workers;
    config.journal_path = journal;
    config.session_seed = seed;
    Service service(std::move(registry), config);
    HttpServer server(service);
    server.start(port);
    std::cout << "qorch serving on 127.0.0.1:" << server.port() << " with " << workers
              << " workers\n"
              << std::flush;
    server.wait_until_stopped();
    if (remote) remote->stop();
    return 0;
}

void emit_rows(const std::vector<BenchRow>& rows, const std::string& out_path) {
    if (!out_path.empty()) {
        save_bench_csv(rows, out_path);
        std::cout << rows.size() << " rows written to " << out_path << "\n";
    } else {
        std::cout << bench_csv_header() << "\n";
        for (const auto& row : rows) std::cout << bench_csv_line(row) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qorch: circuit job orchestration benchmark driver"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the orchestrator HTTP service");
    int serve_port = 8080, serve_workers = 8;
    uint64_t serve_seed = 1;
    std::string serve_journal, serve_mock_latency;
    serve->add_option("--port", serve_port, "Listen port (0 picks a free port)");
    serve->add_option("--workers", serve_workers, "Worker pool size");
    serve->add_option("--journal", serve_journal, "Append-only JSONL transition log path");
    serve->add_option("--seed", serve_seed, "Session seed (job-id token, mock-remote delays)");
    serve->add_option("--mock-remote-latency", serve_mock_latency,
                      "Also host a mock cloud endpoint; profile e.g. fixed:300 or "
                      "uniform:10,50/lognormal:5.5,0.6");

    // shared run/qaoa/dqaoa options
    std::string endpoint;
    bool inproc = false;

    auto* run = app.add_subcommand("run", "Sweep a workload over sizes x backends");
    std::string run_workload, run_sizes, run_backends = "sv", run_out;
    uint64_t run_shots = 1024, run_seed = 1;
    int run_reps = 3, run_parallel = 1;
    double run_guard = 120000;
    run->add_option("--workload", run_workload, "ghz | ham | tfim | hhl")->required();
    run->add_option("--sizes", run_sizes, "e.g. 4,8,12 or 4..24:4")->required();
    run->add_option("--backends", run_backends, "Comma list, e.g. sv,mps:mps-chi64");
    run->add_option("--shots", run_shots);
    run->add_option("--reps", run_reps, "Repetitions per cell (default 3)");
    run->add_option("--seed", run_seed);
    run->add_option("--out", run_out, "CSV output path (default: print rows)");
    run->add_option("--parallel-cells", run_parallel, "Concurrent grid cells");
    run->add_option("--walltime-guard-ms", run_guard,
                    "Skip a cell's remaining reps once one rep exceeds this");
    run->add_flag("--inproc", inproc, "Execute in-process instead of over the wire");
    run->add_option("--endpoint", endpoint,
                    "Orchestrator host:port (default $QORCH_ENDPOINT or 127.0.0.1:8080)");

    auto add_variational_options = [&](CLI::App* cmd, VariationalSpec& spec, std::string& out,
                                       std::string& solution_out, std::string& backend) {
        cmd->add_option("--size", spec.size, "QUBO variable count")->required();
        cmd->add_option("--p", spec.p, "Ansatz layers");
        cmd->add_option("--shots", spec.shots);
        cmd->add_option("--max-evals", spec.max_evals, "Optimizer evaluation budget");
        cmd->add_option("--seed", spec.seed);
        cmd->add_option("--backend", backend, "Backend spec, e.g. sv or mps:mps-chi32");
        cmd->add_option("--out", out, "Timeline CSV output path");
        cmd->add_option("--solution-out", solution_out, "Solution JSON output path");
        cmd->add_flag("--inproc", inproc, "Execute in-process instead of over the wire");
        cmd->add_option("--endpoint", endpoint,
                        "Orchestrator host:port (default $QORCH_ENDPOINT or 127.0.0.1:8080)");
    };

    auto* qaoa = app.add_subcommand("qaoa", "Solve a seeded random QUBO with the full ansatz");
    VariationalSpec qaoa_spec;
    std::string qaoa_out, qaoa_solution_out, qaoa_backend = "sv";
    add_variational_options(qaoa, qaoa_spec, qaoa_out, qaoa_solution_out, qaoa_backend);

    auto* dqaoa = app.add_subcommand("dqaoa", "Decompose / solve-concurrently / merge solver");
    VariationalSpec dqaoa_spec;
    dqaoa_spec.decomposed = true;
    std::string dqaoa_out, dqaoa_solution_out, dqaoa_backend = "sv";
    add_variational_options(dqaoa, dqaoa_spec, dqaoa_out, dqaoa_solution_out, dqaoa_backend);
    dqaoa->add_option("--subqsize", dqaoa_spec.subqsize, "Sub-problem size");
    dqaoa->add_option("--nsubq", dqaoa_spec.nsubq, "Sub-problems per iteration");
    dqaoa->add_option("--max-iters", dqaoa_spec.max_iters);
    dqaoa->add_option("--patience", dqaoa_spec.patience, "Stop after this many stale iterations");
    dqaoa->add_option("--concurrency", dqaoa_spec.concurrency, "Sub-solves in flight");

    auto* compare = app.add_subcommand("compare", "Per-size fastest backend across CSVs");
    std::vector<std::string> compare_inputs;
    compare->add_option("--inputs", compare_inputs, "Result CSVs to merge")
        ->required()
        ->expected(-1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve->parsed())
            return cmd_serve(serve_port, serve_workers, serve_journal, serve_seed,
                             serve_mock_latency);

        if (run->parsed()) {
            GridSpec spec;
            spec.workload = run_workload;
            spec.sizes = parse_sizes(run_sizes);
            std::stringstream backends(run_backends);
            std::string token;
            while (std::getline(backends, token, ','))
                spec.backends.push_back(parse_backend_spec(token));
            spec.shots = run_shots;
            spec.reps = run_reps;
            spec.seed = run_seed;
            spec.walltime_guard_ms = run_guard;
            spec.parallel_cells = run_parallel;
            auto stack = make_stack(inproc, endpoint);
            const auto rows = run_grid(spec, stack.factory());
            emit_rows(rows, run_out);
            std::cout << summarize_grid(rows);
            return 0;
        }

        if (qaoa->parsed() || dqaoa->parsed()) {
            auto& spec = qaoa->parsed() ? qaoa_spec : dqaoa_spec;
            const auto& out = qaoa->parsed() ? qaoa_out : dqaoa_out;
            const auto& solution_out = qaoa->parsed() ? qaoa_solution_out : dqaoa_solution_out;
            spec.backend = parse_backend_spec(qaoa->parsed() ? qaoa_backend : dqaoa_backend);
            if (spec.decomposed && spec.subqsize > spec.size) {
                std::cerr << "error: --subqsize (" << spec.subqsize
                          << ") cannot exceed --size (" << spec.size << ")\n";
                return 2;
            }
            auto stack = make_stack(inproc, endpoint);
            auto exec = stack.factory()(spec.backend);
            const auto outcome = run_variational(spec, *exec);
            emit_rows(outcome.rows, out);
            const std::string solution = solution_to_json(outcome.record);
            if (!solution_out.empty()) {
                std::ofstream file(solution_out);
                if (!file) throw QorchError("io", "cannot write " + solution_out);
                file << solution << "\n";
                std::cout << "solution written to " << solution_out << "\n";
            } else {
                std::cout << solution << "\n";
            }
            return 0;
        }

        if (compare->parsed()) {
            std::vector<BenchRow> rows;
            for (const auto& path : compare_inputs)
                for (auto& row : load_bench_csv(path)) rows.push_back(std::move(row));
            std::cout << compare_table(compare_rows(rows));
            return 0;
        }
    } catch (const QorchError& e) {
        std::cerr << "error [" << e.code << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
