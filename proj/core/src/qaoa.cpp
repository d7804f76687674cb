#include "qorch/qaoa.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "qorch/rng.hpp"

namespace qorch {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

class LocalExecutor : public Executor {
public:
    explicit LocalExecutor(BackendSelector selector)
        : registry_(BackendRegistry::with_local_backends()), selector_(std::move(selector)) {}

    ExecutionResult run(const Circuit& circuit, uint64_t shots, uint64_t seed) override {
        ExecutionRequest request;
        request.circuit = circuit;
        request.shots = shots;
        request.selector = selector_;
        request.seed = seed;
        return adapter_execute(registry_, request);
    }

private:
    BackendRegistry registry_;
    BackendSelector selector_;
};

class ClientExecutor : public Executor {
public:
    ClientExecutor(Client& client, BackendSelector selector)
        : client_(client), selector_(std::move(selector)) {}

    ExecutionResult run(const Circuit& circuit, uint64_t shots, uint64_t seed) override {
        return client_.execute(circuit, shots, selector_, seed);
    }

private:
    Client& client_;
    BackendSelector selector_;
};

/// Wraps another executor to track how many runs are in flight at once.
class CountingExecutor : public Executor {
public:
    explicit CountingExecutor(Executor& inner) : inner_(inner) {}

    ExecutionResult run(const Circuit& circuit, uint64_t shots, uint64_t seed) override {
        const int now = in_flight_.fetch_add(1) + 1;
        int seen = high_water_.load();
        while (now > seen && !high_water_.compare_exchange_weak(seen, now)) {
        }
        auto result = inner_.run(circuit, shots, seed);
        in_flight_.fetch_sub(1);
        return result;
    }

    int take_high_water() { return high_water_.exchange(0); }

private:
    Executor& inner_;
    std::atomic<int> in_flight_{0};
    std::atomic<int> high_water_{0};
};

/// Ising image of the QUBO under x = (1 - z)/2, constants dropped:
/// cost = const + sum_i h[i] Z_i + sum_{i<j} J[i][j] Z_i Z_j.
struct IsingTerms {
    std::vector<double> h;
    std::vector<std::vector<double>> j;
};

IsingTerms ising_terms(const QuboProblem& q) {
    const int n = q.size;
    IsingTerms terms{std::vector<double>(size_t(n), 0.0),
                     std::vector<std::vector<double>>(size_t(n), std::vector<double>(size_t(n)))};
    for (int i = 0; i < n; ++i) {
        terms.h[size_t(i)] = -q.at(i, i) / 2;
        for (int k = 0; k < n; ++k)
            if (k != i) terms.h[size_t(i)] -= (q.at(i, k) + q.at(k, i)) / 4;
        for (int k = i + 1; k < n; ++k)
            terms.j[size_t(i)][size_t(k)] = (q.at(i, k) + q.at(k, i)) / 4;
    }
    return terms;
}

std::vector<uint8_t> bits_from_key(const std::string& key) {
    std::vector<uint8_t> x(key.size());
    for (size_t i = 0; i < key.size(); ++i) x[i] = key[i] == '1';
    return x;
}

void default_angles(const QaoaParams& params, std::vector<double>& gammas,
                    std::vector<double>& betas) {
    gammas = params.gammas;
    betas = params.betas;
    if (gammas.empty())
        for (int k = 0; k < params.p; ++k) gammas.push_back(0.1 * (k + 1));
    if (betas.empty())
        for (int k = 0; k < params.p; ++k) betas.push_back(0.1 * (params.p - k));
    if (int(gammas.size()) != params.p || int(betas.size()) != params.p)
        throw QorchError("invalid-argument", "angle arrays must have length p");
}

/// Thrown by the objective when the evaluation budget is spent; unwinds the
/// optimizer with the best-seen state already recorded by the caller.
struct BudgetExhausted {};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Stops when the simplex value spread drops below tolerance
/// or `f` throws BudgetExhausted.
void nelder_mead(std::vector<double> x0,
                 const std::function<double(const std::vector<double>&)>& f, double tolerance) {
    const size_t dim = x0.size();
    std::vector<std::vector<double>> simplex{x0};
    for (size_t i = 0; i < dim; ++i) {
        auto v = x0;
        v[i] += 0.25;
        simplex.push_back(v);
    }
    std::vector<double> value;
    for (const auto& v : simplex) value.push_back(f(v));
    std::vector<size_t> order(simplex.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (;;) {
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return value[a] < value[b]; });
        if (value[order.back()] - value[order.front()] < tolerance) return;

        std::vector<double> centroid(dim, 0.0);
        for (size_t k = 0; k + 1 < order.size(); ++k)
            for (size_t i = 0; i < dim; ++i) centroid[i] += simplex[order[k]][i];
        for (double& c : centroid) c /= double(dim);
        const size_t worst = order.back(), best = order.front();

        auto point = [&](double coeff) {
            std::vector<double> v(dim);
            for (size_t i = 0; i < dim; ++i)
                v[i] = centroid[i] + coeff * (simplex[worst][i] - centroid[i]);
            return v;
        };

        const auto reflected = point(-1.0);
        const double fr = f(reflected);
        if (fr < value[best]) {
            const auto expanded = point(-2.0);
            const double fe = f(expanded);
            simplex[worst] = fe < fr ? expanded : reflected;
            value[worst] = std::min(fe, fr);
            continue;
        }
        const double second_worst = value[order[order.size() - 2]];
        if (fr < second_worst) {
            simplex[worst] = reflected;
            value[worst] = fr;
            continue;
        }
        const auto contracted = point(fr < value[worst] ? -0.5 : 0.5);
        const double fc = f(contracted);
        if (fc < std::min(fr, value[worst])) {
            simplex[worst] = contracted;
            value[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (size_t k = 1; k < order.size(); ++k) {
            const size_t idx = order[k];
            for (size_t i = 0; i < dim; ++i)
                simplex[idx][i] = simplex[best][i] + 0.5 * (simplex[idx][i] - simplex[best][i]);
            value[idx] = f(simplex[idx]);
        }
    }
}

} // namespace

std::unique_ptr<Executor> make_local_executor(BackendSelector selector) {
    return std::make_unique<LocalExecutor>(std::move(selector));
}

std::unique_ptr<Executor> make_client_executor(Client& client, BackendSelector selector) {
    return std::make_unique<ClientExecutor>(client, std::move(selector));
}

Circuit build_qaoa_circuit(const QuboProblem& q, const std::vector<double>& gammas,
                           const std::vector<double>& betas) {
    q.check_symmetric();
    if (gammas.size() != betas.size() || gammas.empty())
        throw QorchError("invalid-argument", "need matching, nonempty gamma/beta arrays");
    const int n = q.size;
    const auto terms = ising_terms(q);
    Circuit c;
    c.num_qubits = n;
    c.name = "qaoa-" + std::to_string(n);
    for (int i = 0; i < n; ++i) c.ops.push_back(GateOp::one(GateKind::H, i));
    for (size_t layer = 0; layer < gammas.size(); ++layer) {
        const double gamma = gammas[layer], beta = betas[layer];
        for (int i = 0; i < n; ++i)
            if (terms.h[size_t(i)] != 0)
                c.ops.push_back(GateOp::one(GateKind::RZ, i, 2 * gamma * terms.h[size_t(i)]));
        for (int i = 0; i < n; ++i)
            for (int k = i + 1; k < n; ++k)
                if (terms.j[size_t(i)][size_t(k)] != 0)
                    c.ops.push_back(
                        GateOp::two(GateKind::RZZ, i, k, 2 * gamma * terms.j[size_t(i)][size_t(k)]));
        for (int i = 0; i < n; ++i) c.ops.push_back(GateOp::one(GateKind::RX, i, 2 * beta));
    }
    for (int i = 0; i < n; ++i) c.measured_qubits.push_back(i);
    return c;
}

SolutionRecord qaoa_solve(const QuboProblem& q, const QaoaParams& params, Executor& exec) {
    if (params.p < 1) throw QorchError("invalid-argument", "p must be >= 1");
    if (params.optimizer.method != "nelder-mead")
        throw QorchError("invalid-argument",
                         "unknown optimizer method: " + params.optimizer.method);
    std::vector<double> gammas, betas;
    default_angles(params, gammas, betas);

    SolutionRecord record;
    record.bitstring.assign(size_t(q.size), 0);
    record.cost = qubo_cost(q, record.bitstring);
    double best_sample_cost = record.cost;

    uint64_t evals = 0;
    auto objective = [&](const std::vector<double>& angles) {
        if (evals >= uint64_t(params.optimizer.max_evals)) throw BudgetExhausted{};
        const auto eval_start = Clock::now();
        std::vector<double> g(angles.begin(), angles.begin() + params.p);
        std::vector<double> b(angles.begin() + params.p, angles.end());
        const auto circuit = build_qaoa_circuit(q, g, b);
        const uint64_t seed = derive_seed(params.optimizer.seed, evals);
        const auto result = exec.run(circuit, params.shots, seed);
        ++evals;
        double mean = 0;
        for (const auto& [key, count] : result.counts) {
            const auto x = bits_from_key(key);
            const double cost = qubo_cost(q, x);
            mean += cost * double(count);
            if (cost < best_sample_cost) {
                best_sample_cost = cost;
                record.bitstring = x;
            }
        }
        mean /= double(result.shots);
        record.iteration_log.push_back({mean, ms_since(eval_start), 1});
        return mean;
    };

    std::vector<double> x0 = gammas;
    x0.insert(x0.end(), betas.begin(), betas.end());
    try {
        nelder_mead(x0, objective, params.optimizer.tolerance);
    } catch (const BudgetExhausted&) {
    }

    record.cost = qubo_cost(q, record.bitstring);
    record.evals = evals;
    if (q.size <= 24) {
        const auto reference = brute_force(q);
        record.fidelity =
            solution_fidelity(record.cost, reference.best_cost, reference.worst_cost);
    }
    return record;
}

SolutionRecord dqaoa_solve(const QuboProblem& q, const DqaoaConfig& cfg,
                           const QaoaParams& qparams, Executor& exec) {
    if (cfg.subqsize < 1 || cfg.subqsize > q.size)
        throw QorchError("invalid-argument", "subqsize must be in [1, N]");
    if (cfg.nsubq < 1 || cfg.max_iters < 1 || cfg.concurrency < 1)
        throw QorchError("invalid-argument", "nsubq, max_iters, concurrency must be >= 1");

    CountingExecutor counting(exec);
    Rng rng(cfg.seed);

    SolutionRecord record;
    record.bitstring.assign(size_t(q.size), 0);
    double incumbent_cost = qubo_cost(q, record.bitstring);

    int stale_iters = 0;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        const auto iter_start = Clock::now();

        // (1) random, possibly overlapping variable subsets
        std::vector<std::vector<int>> subsets;
        for (int s = 0; s < cfg.nsubq; ++s) {
            std::vector<int> pool(size_t(q.size));
            for (int i = 0; i < q.size; ++i) pool[size_t(i)] = i;
            for (int i = 0; i < cfg.subqsize; ++i) {
                const size_t pick = size_t(i) + size_t(rng.next_below(uint64_t(q.size - i)));
                std::swap(pool[size_t(i)], pool[pick]);
            }
            subsets.emplace_back(pool.begin(), pool.begin() + cfg.subqsize);
        }

        // (2)+(3) clamp against the incumbent and solve concurrently
        struct Candidate {
            std::vector<int> indices;
            SolutionRecord sub;
            bool ok = false;
            std::string error;
        };
        std::vector<Candidate> candidates(subsets.size());
        std::atomic<size_t> next{0};
        auto sub_worker = [&] {
            for (;;) {
                const size_t s = next.fetch_add(1);
                if (s >= subsets.size()) return;
                candidates[s].indices = subsets[s];
                try {
                    const auto sub_q = extract_subqubo(q, record.bitstring, subsets[s]);
                    QaoaParams sub_params = qparams;
                    sub_params.optimizer.seed =
                        derive_seed(cfg.seed, uint64_t(iter) * uint64_t(cfg.nsubq) + s);
                    candidates[s].sub = qaoa_solve(sub_q, sub_params, counting);
                    candidates[s].ok = true;
                } catch (const std::exception& e) {
                    candidates[s].error = e.what(); // logged; iteration continues
                }
            }
        };
        std::vector<std::thread> pool;
        const int threads = std::min<int>(cfg.concurrency, int(subsets.size()));
        for (int t = 0; t < threads; ++t) pool.emplace_back(sub_worker);
        for (auto& thread : pool) thread.join();

        // (4) greedy merge in ascending candidate cost, strict improvement
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.ok != b.ok) return a.ok;
            return a.sub.cost < b.sub.cost;
        });
        for (const auto& candidate : candidates) {
            if (!candidate.ok) continue;
            record.evals += candidate.sub.evals;
            auto trial = record.bitstring;
            for (size_t k = 0; k < candidate.indices.size(); ++k)
                trial[size_t(candidate.indices[k])] = candidate.sub.bitstring[k];
            const double trial_cost = qubo_cost(q, trial);
            if (trial_cost < incumbent_cost) {
                record.bitstring = std::move(trial);
                incumbent_cost = trial_cost;
            }
        }

        const double before =
            record.iteration_log.empty() ? qubo_cost(q, std::vector<uint8_t>(size_t(q.size), 0))
                                         : record.iteration_log.back().cost;
        record.iteration_log.push_back(
            {incumbent_cost, ms_since(iter_start), counting.take_high_water()});

        // (5) patience
        stale_iters = incumbent_cost < before ? 0 : stale_iters + 1;
        if (iter > 0 && stale_iters >= cfg.no_improve_patience) break;
    }

    record.cost = incumbent_cost;
    if (q.size <= 24) {
        const auto reference = brute_force(q);
        record.fidelity =
            solution_fidelity(record.cost, reference.best_cost, reference.worst_cost);
    }
    return record;
}

} // namespace qorch
