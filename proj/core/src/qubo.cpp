#include "qorch/qubo.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qorch/result.hpp"
#include "qorch/rng.hpp"

namespace qorch {

void QuboProblem::check_symmetric() const {
    for (int i = 0; i < size; ++i)
        for (int j = i + 1; j < size; ++j)
            if (std::abs(at(i, j) - at(j, i)) > 1e-12)
                throw QorchError("invalid-argument",
                                 "Q not symmetric at (" + std::to_string(i) + "," +
                                     std::to_string(j) + ")");
}

double qubo_cost(const QuboProblem& q, const std::vector<uint8_t>& x) {
    if (static_cast<int>(x.size()) != q.size)
        throw QorchError("invalid-argument", "bitvector length mismatch");
    double c = 0;
    for (int i = 0; i < q.size; ++i) {
        if (!x[i]) continue;
        c += q.at(i, i);
        for (int j = i + 1; j < q.size; ++j)
            if (x[j]) c += q.at(i, j) + q.at(j, i);
    }
    return c;
}

namespace {

// lexicographic order with x[0] most significant
bool lex_less(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

} // namespace

BruteForceResult brute_force(const QuboProblem& q) {
    if (q.size > 24) throw QorchError("capacity", "brute force capped at N = 24");
    if (q.size < 1) throw QorchError("invalid-argument", "empty problem");

    BruteForceResult out;
    std::vector<uint8_t> x(q.size, 0);
    out.best_x = x;
    out.best_cost = qubo_cost(q, x);
    out.worst_cost = out.best_cost;
    const uint64_t count = uint64_t{1} << q.size;
    for (uint64_t mask = 1; mask < count; ++mask) {
        for (int i = 0; i < q.size; ++i) x[i] = (mask >> i) & 1;
        const double c = qubo_cost(q, x);
        if (c < out.best_cost || (c == out.best_cost && lex_less(x, out.best_x))) {
            out.best_cost = c;
            out.best_x = x;
        }
        if (c > out.worst_cost) out.worst_cost = c;
    }
    return out;
}

QuboProblem extract_subqubo(const QuboProblem& q, const std::vector<uint8_t>& current_x,
                            const std::vector<int>& indices) {
    if (static_cast<int>(current_x.size()) != q.size)
        throw QorchError("invalid-argument", "incumbent length mismatch");
    std::vector<uint8_t> selected(q.size, 0);
    for (int i : indices) {
        if (i < 0 || i >= q.size)
            throw QorchError("invalid-argument", "sub-QUBO index out of range");
        if (selected[i]) throw QorchError("invalid-argument", "duplicate sub-QUBO index");
        selected[i] = 1;
    }

    const int m = static_cast<int>(indices.size());
    QuboProblem sub = QuboProblem::zeros(m);
    for (int a = 0; a < m; ++a) {
        const int i = indices[a];
        for (int b = 0; b < m; ++b) sub.at(a, b) = q.at(i, indices[b]);
        // clamp couplings to fixed outside variables into the diagonal
        double clamp = 0;
        for (int j = 0; j < q.size; ++j)
            if (!selected[j] && current_x[j]) clamp += q.at(i, j) + q.at(j, i);
        sub.at(a, a) += clamp;
    }
    return sub;
}

double solution_fidelity(double found_cost, double best_cost, double worst_cost) {
    if (worst_cost < best_cost)
        throw QorchError("invalid-argument", "worst_cost below best_cost");
    if (worst_cost == best_cost) return 1.0;
    const double f = (worst_cost - found_cost) / (worst_cost - best_cost);
    return std::min(1.0, std::max(0.0, f));
}

QuboProblem random_qubo(int n, uint64_t seed, double density) {
    Rng rng(seed);
    QuboProblem q = QuboProblem::zeros(n);
    for (int i = 0; i < n; ++i) {
        q.at(i, i) = 2 * rng.next_double() - 1;
        for (int j = i + 1; j < n; ++j) {
            if (rng.next_double() < density) {
                const double v = 2 * rng.next_double() - 1;
                q.at(i, j) = v;
                q.at(j, i) = v;
            }
        }
    }
    return q;
}

QuboProblem load_qubo_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QorchError("io", "cannot open " + path);
    nlohmann::json j;
    in >> j;
    const int n = j.at("size").get<int>();
    if (n < 1) throw QorchError("invalid-argument", "size must be positive");
    QuboProblem q = QuboProblem::zeros(n);
    for (const auto& e : j.at("entries")) {
        const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        const double v = e.at(2).get<double>();
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw QorchError("invalid-argument", "entry index out of range");
        q.at(a, b) = v;
        q.at(b, a) = v; // symmetric completion
    }
    return q;
}

void save_qubo_json(const QuboProblem& q, const std::string& path) {
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < q.size; ++i)
        for (int j = i; j < q.size; ++j)
            if (q.at(i, j) != 0) entries.push_back({i, j, q.at(i, j)});
    nlohmann::json j{{"size", q.size}, {"entries", entries}};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

} // namespace qorch
