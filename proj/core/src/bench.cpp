#include "qorch/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qorch/rng.hpp"
#include "qorch/workloads.hpp"

namespace qorch {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                current += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string bench_csv_header() {
    return "workload,size,backend,subbackend,shots,rep,wall_ms,queue_ms,exec_ms,fidelity,"
           "extra_json,error_code";
}

std::string bench_csv_line(const BenchRow& row) {
    json extra = json::object();
    for (const auto& [key, value] : row.extra) extra[key] = value;
    std::ostringstream out;
    out << csv_escape(row.workload) << ',' << row.size << ',' << csv_escape(row.backend) << ','
        << csv_escape(row.subbackend) << ',' << row.shots << ',' << row.rep << ','
        << format_double(row.wall_ms) << ',' << format_double(row.queue_ms) << ','
        << format_double(row.exec_ms) << ','
        << (row.fidelity ? format_double(*row.fidelity) : std::string()) << ','
        << csv_escape(extra.dump()) << ',' << csv_escape(row.error_code);
    return out.str();
}

BenchRow bench_csv_parse(const std::string& line) {
    const auto fields = csv_split(line);
    if (fields.size() != 12)
        throw QorchError("csv-parse", "expected 12 fields, got " +
                                          std::to_string(fields.size()) + ": " + line);
    BenchRow row;
    try {
        row.workload = fields[0];
        row.size = std::stoi(fields[1]);
        row.backend = fields[2];
        row.subbackend = fields[3];
        row.shots = std::stoull(fields[4]);
        row.rep = std::stoi(fields[5]);
        row.wall_ms = std::stod(fields[6]);
        row.queue_ms = std::stod(fields[7]);
        row.exec_ms = std::stod(fields[8]);
        if (!fields[9].empty()) row.fidelity = std::stod(fields[9]);
        const json extra = json::parse(fields[10]);
        for (const auto& [key, value] : extra.items()) row.extra[key] = value.get<std::string>();
        row.error_code = fields[11];
    } catch (const std::exception& e) {
        throw QorchError("csv-parse", std::string("bad row: ") + e.what());
    }
    return row;
}

void save_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw QorchError("io", "cannot write " + path);
    out << bench_csv_header() << "\n";
    for (const auto& row : rows) out << bench_csv_line(row) << "\n";
}

std::vector<BenchRow> load_bench_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QorchError("io", "cannot read " + path);
    std::string line;
    if (!std::getline(in, line) || line != bench_csv_header())
        throw QorchError("csv-parse", path + ": missing or wrong header");
    std::vector<BenchRow> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(bench_csv_parse(line));
    return rows;
}

std::vector<int> parse_sizes(const std::string& text) {
    std::vector<int> sizes;
    std::stringstream stream(text);
    std::string token;
    auto number = [&](const std::string& s) {
        try {
            size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size() || v < 1) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw QorchError("bad-sizes", "cannot parse size token: " + token);
        }
    };
    while (std::getline(stream, token, ',')) {
        const auto dots = token.find("..");
        if (dots == std::string::npos) {
            sizes.push_back(number(token));
            continue;
        }
        const int lo = number(token.substr(0, dots));
        std::string rest = token.substr(dots + 2);
        int stride = 1;
        const auto colon = rest.find(':');
        if (colon != std::string::npos) {
            stride = number(rest.substr(colon + 1));
            rest = rest.substr(0, colon);
        }
        const int hi = number(rest);
        if (hi < lo) throw QorchError("bad-sizes", "range is backwards: " + token);
        for (int v = lo; v <= hi; v += stride) sizes.push_back(v);
    }
    if (sizes.empty()) throw QorchError("bad-sizes", "no sizes in: " + text);
    return sizes;
}

BackendSelector parse_backend_spec(const std::string& text) {
    BackendSelector selector;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        selector.backend = text;
    } else {
        selector.backend = text.substr(0, colon);
        selector.subbackend = text.substr(colon + 1);
    }
    if (selector.backend.empty()) throw QorchError("bad-backend", "empty backend spec");
    return selector;
}

namespace {

/// Circuit plus the counts-derived quality metric for one grid cell.
struct WorkloadCell {
    Circuit circuit;
    std::map<std::string, std::string> extra;
    std::function<std::optional<double>(const std::map<std::string, uint64_t>&, uint64_t)>
        quality;
};

WorkloadCell make_cell(const std::string& workload, int size) {
    WorkloadCell cell;
    if (workload == "ghz") {
        cell.circuit = build_ghz(size);
        cell.quality = [size](const std::map<std::string, uint64_t>& counts, uint64_t shots) {
            uint64_t good = 0;
            const std::string zeros(size_t(size), '0'), ones(size_t(size), '1');
            for (const auto& [key, count] : counts)
                if (key == zeros || key == ones) good += count;
            return std::optional<double>(double(good) / double(shots));
        };
    } else if (workload == "ham") {
        const int steps = (size + 3) / 4;
        cell.circuit = build_ham(size, steps);
        cell.extra["steps"] = std::to_string(steps);
    } else if (workload == "tfim") {
        const auto spec = TfimSpec::defaults(size);
        cell.circuit = build_tfim(spec);
        cell.extra["steps"] = std::to_string(spec.steps);
    } else if (workload == "hhl") {
        const auto problem = hhl_benchmark_instance(size);
        cell.circuit = build_hhl(problem);
        const auto classical = hhl_classical_distribution(problem);
        const int n_b = int(std::log2(double(problem.a.rows())) + 0.5);
        cell.extra["n_clock"] = std::to_string(problem.n_clock);
        cell.quality = [classical, n_b](const std::map<std::string, uint64_t>& counts,
                                        uint64_t) -> std::optional<double> {
            uint64_t accepted = 0;
            std::vector<double> freq(size_t(classical.size()), 0.0);
            for (const auto& [key, count] : counts) {
                if (key.empty() || key[0] != '1') continue;
                accepted += count;
                size_t idx = 0;
                for (int j = 0; j < n_b; ++j)
                    if (key[size_t(1 + j)] == '1') idx |= size_t{1} << j;
                freq[idx] += double(count);
            }
            if (accepted == 0) return std::nullopt;
            double tv = 0;
            for (size_t i = 0; i < freq.size(); ++i)
                tv += std::abs(freq[i] / double(accepted) - classical[Eigen::Index(i)]);
            return 1.0 - tv / 2;
        };
    } else {
        throw QorchError("bad-workload", "unknown workload: " + workload);
    }
    return cell;
}

} // namespace

Circuit build_workload(const std::string& workload, int size) {
    return make_cell(workload, size).circuit;
}

std::vector<BenchRow> run_grid(const GridSpec& spec, const ExecutorFactory& make_executor) {
    if (spec.reps < 1) throw QorchError("bad-grid", "reps must be >= 1");
    if (spec.sizes.empty() || spec.backends.empty())
        throw QorchError("bad-grid", "need at least one size and one backend");

    struct Cell {
        int size = 0;
        BackendSelector selector;
        size_t index = 0;
    };
    std::vector<Cell> cells;
    for (int size : spec.sizes)
        for (const auto& selector : spec.backends)
            cells.push_back({size, selector, cells.size()});

    std::vector<std::vector<BenchRow>> per_cell(cells.size());
    std::atomic<size_t> next{0};

    auto run_cell = [&](const Cell& cell) {
        auto& rows = per_cell[cell.index];
        BenchRow base;
        base.workload = spec.workload;
        base.size = cell.size;
        base.backend = cell.selector.backend;
        base.subbackend = cell.selector.subbackend;
        base.shots = spec.shots;

        WorkloadCell work;
        try {
            work = make_cell(spec.workload, cell.size);
        } catch (const QorchError& e) {
            for (int rep = 0; rep < spec.reps; ++rep) {
                auto row = base;
                row.rep = rep;
                row.error_code = e.code;
                rows.push_back(row);
            }
            return;
        }
        base.extra = work.extra;

        std::unique_ptr<Executor> exec;
        bool over_budget = false;
        for (int rep = 0; rep < spec.reps; ++rep) {
            auto row = base;
            row.rep = rep;
            if (over_budget) {
                row.error_code = "walltime";
                rows.push_back(row);
                continue;
            }
            const uint64_t seed = derive_seed(spec.seed, cell.index * uint64_t(spec.reps) +
                                                             uint64_t(rep));
            const auto start = Clock::now();
            try {
                if (!exec) exec = make_executor(cell.selector);
                const auto result = exec->run(work.circuit, spec.shots, seed);
                row.wall_ms = ms_since(start);
                row.queue_ms = result.queue_ms;
                row.exec_ms = result.exec_ms;
                if (work.quality) row.fidelity = work.quality(result.counts, result.shots);
                if (row.wall_ms > spec.walltime_guard_ms) {
                    row.error_code = "walltime";
                    over_budget = true;
                }
            } catch (const QorchError& e) {
                row.wall_ms = 0;
                row.error_code = e.code;
            } catch (const std::exception&) {
                row.wall_ms = 0;
                row.error_code = "internal";
            }
            rows.push_back(row);
        }
    };

    const int threads = std::max(1, std::min<int>(spec.parallel_cells, int(cells.size())));
    if (threads == 1) {
        for (const auto& cell : cells) run_cell(cell);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    run_cell(cells[i]);
                }
            });
        for (auto& thread : pool) thread.join();
    }

    std::vector<BenchRow> rows;
    for (auto& bucket : per_cell)
        for (auto& row : bucket) rows.push_back(std::move(row));
    return rows;
}

std::string summarize_grid(const std::vector<BenchRow>& rows) {
    struct Agg {
        std::vector<double> wall;
        std::vector<double> fidelity;
        int errors = 0;
    };
    std::map<std::string, Agg> groups;
    for (const auto& row : rows) {
        const std::string key = row.workload + " n=" + std::to_string(row.size) + " " +
                                row.backend +
                                (row.subbackend.empty() ? "" : ":" + row.subbackend);
        auto& agg = groups[key];
        if (!row.error_code.empty()) {
            ++agg.errors;
            continue;
        }
        agg.wall.push_back(row.wall_ms);
        if (row.fidelity) agg.fidelity.push_back(*row.fidelity);
    }
    std::ostringstream out;
    for (const auto& [key, agg] : groups) {
        out << key << ": ";
        if (agg.wall.empty()) {
            out << "no successful reps";
        } else {
            double mean = 0;
            for (double w : agg.wall) mean += w;
            mean /= double(agg.wall.size());
            double var = 0;
            for (double w : agg.wall) var += (w - mean) * (w - mean);
            const double stddev =
                agg.wall.size() > 1 ? std::sqrt(var / double(agg.wall.size() - 1)) : 0.0;
            out << format_double(mean) << " +/- " << format_double(stddev) << " ms over "
                << agg.wall.size() << " reps";
            if (!agg.fidelity.empty()) {
                double fid = 0;
                for (double f : agg.fidelity) fid += f;
                out << ", fidelity " << format_double(fid / double(agg.fidelity.size()));
            }
        }
        if (agg.errors > 0) out << " (" << agg.errors << " error rows)";
        out << "\n";
    }
    return out.str();
}

std::vector<CompareCell> compare_rows(const std::vector<BenchRow>& rows) {
    // backend -> size -> wall samples
    std::map<std::string, std::map<int, std::vector<double>>> table;
    for (const auto& row : rows) {
        if (!row.error_code.empty()) continue;
        const std::string backend =
            row.backend + (row.subbackend.empty() ? "" : ":" + row.subbackend);
        table[backend][row.size].push_back(row.wall_ms);
    }
    if (table.empty()) throw QorchError("compare", "no successful rows to compare");
    const auto& reference = table.begin()->second;
    for (const auto& [backend, sizes] : table) {
        if (sizes.size() != reference.size() ||
            !std::equal(sizes.begin(), sizes.end(), reference.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; }))
            throw QorchError("compare", "backend " + backend +
                                            " was measured on a different size set");
    }
    std::vector<CompareCell> cells;
    for (const auto& [size, ignored] : reference) {
        (void)ignored;
        double best = std::numeric_limits<double>::infinity();
        std::string best_backend;
        for (const auto& [backend, sizes] : table) {
            const auto& samples = sizes.at(size);
            double mean = 0;
            for (double w : samples) mean += w;
            mean /= double(samples.size());
            cells.push_back({size, backend, mean, false});
            if (mean < best) {
                best = mean;
                best_backend = backend;
            }
        }
        for (auto& cell : cells)
            if (cell.size == size && cell.backend == best_backend) cell.fastest = true;
    }
    return cells;
}

std::string compare_table(const std::vector<CompareCell>& cells) {
    std::ostringstream out;
    out << "size,backend,mean_wall_ms,fastest\n";
    for (const auto& cell : cells)
        out << cell.size << ',' << cell.backend << ',' << format_double(cell.mean_wall_ms) << ','
            << (cell.fastest ? "yes" : "no") << "\n";
    return out.str();
}

VariationalOutcome run_variational(const VariationalSpec& spec, Executor& exec) {
    const auto q = random_qubo(spec.size, spec.seed);
    QaoaParams params;
    params.p = spec.p;
    params.shots = spec.shots;
    params.optimizer.max_evals = spec.max_evals;
    params.optimizer.seed = spec.seed;

    VariationalOutcome outcome;
    const auto start = Clock::now();
    if (spec.decomposed) {
        DqaoaConfig cfg{spec.subqsize, spec.nsubq,      spec.max_iters,
                        spec.patience, spec.concurrency, spec.seed};
        outcome.record = dqaoa_solve(q, cfg, params, exec);
    } else {
        outcome.record = qaoa_solve(q, params, exec);
    }
    const double total_ms = ms_since(start);

    BenchRow base;
    base.workload = spec.decomposed ? "dqaoa" : "qaoa";
    base.size = spec.size;
    base.backend = spec.backend.backend;
    base.subbackend = spec.backend.subbackend;
    base.shots = spec.shots;
    for (size_t i = 0; i < outcome.record.iteration_log.size(); ++i) {
        const auto& entry = outcome.record.iteration_log[i];
        auto row = base;
        row.rep = int(i);
        row.wall_ms = entry.wall_ms;
        row.extra = {{"kind", "iteration"},
                     {"cost", format_double(entry.cost)},
                     {"jobs_in_flight", std::to_string(entry.jobs_in_flight)}};
        outcome.rows.push_back(row);
    }
    auto summary = base;
    summary.rep = -1;
    summary.wall_ms = total_ms;
    if (outcome.record.fidelity >= 0) summary.fidelity = outcome.record.fidelity;
    summary.extra = {{"kind", "summary"},
                     {"cost", format_double(outcome.record.cost)},
                     {"evals", std::to_string(outcome.record.evals)},
                     {"p", std::to_string(spec.p)}};
    if (spec.decomposed) {
        summary.extra["subqsize"] = std::to_string(spec.subqsize);
        summary.extra["nsubq"] = std::to_string(spec.nsubq);
        summary.extra["concurrency"] = std::to_string(spec.concurrency);
    }
    outcome.rows.push_back(summary);
    return outcome;
}

std::string solution_to_json(const SolutionRecord& record) {
    std::string bits;
    for (uint8_t b : record.bitstring) bits += b ? '1' : '0';
    json iterations = json::array();
    for (const auto& entry : record.iteration_log)
        iterations.push_back({{"cost", entry.cost},
                              {"wall_ms", entry.wall_ms},
                              {"jobs_in_flight", entry.jobs_in_flight}});
    json out{{"bitstring", bits},
             {"cost", record.cost},
             {"evals", record.evals},
             {"iterations", iterations}};
    if (record.fidelity >= 0)
        out["fidelity"] = record.fidelity;
    else
        out["fidelity"] = nullptr;
    return out.dump(2);
}

} // namespace qorch
