#include "qorch/workloads.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qorch/result.hpp"
#include "qorch/synthesis.hpp"

namespace qorch {

Circuit build_ghz(int n) {
    if (n < 2) throw QorchError("invalid-argument", "GHZ needs at least 2 qubits");
    Circuit c;
    c.name = "ghz-" + std::to_string(n);
    c.num_qubits = n;
    c.ops.push_back(GateOp::one(GateKind::H, 0));
    for (int q = 0; q + 1 < n; ++q) c.ops.push_back(GateOp::two(GateKind::CX, q, q + 1));
    for (int q = 0; q < n; ++q) c.measured_qubits.push_back(q);
    return c;
}

Circuit build_ham(int n, int steps) {
    if (n < 2) throw QorchError("invalid-argument", "HAM needs at least 2 qubits");
    if (steps < 1) throw QorchError("invalid-argument", "steps must be >= 1");
    const double dt = 1.0 / steps;
    Circuit c;
    c.name = "ham-" + std::to_string(n);
    c.num_qubits = n;
    for (int q = 0; q < n; ++q) c.ops.push_back(GateOp::one(GateKind::H, q));
    for (int s = 0; s < steps; ++s) {
        for (int q = 0; q + 1 < n; ++q)
            c.ops.push_back(GateOp::two(GateKind::RZZ, q, q + 1, 2 * dt));
        for (int q = 0; q < n; ++q) c.ops.push_back(GateOp::one(GateKind::RX, q, 2 * dt));
    }
    for (int q = 0; q < n; ++q) c.ops.push_back(GateOp::one(GateKind::H, q));
    for (int q = 0; q < n; ++q) c.measured_qubits.push_back(q);
    return c;
}

Circuit build_tfim(const TfimSpec& spec) {
    if (spec.n < 2) throw QorchError("invalid-argument", "TFIM needs at least 2 qubits");
    if (spec.steps < 1) throw QorchError("invalid-argument", "steps must be >= 1");
    const double dt = spec.time / spec.steps;
    Circuit c;
    c.name = "tfim-" + std::to_string(spec.n);
    c.num_qubits = spec.n;
    // Second-order (symmetric) Trotter step: half X layer, full ZZ layer,
    // half X layer.  Adjacent half layers merge into full RX rotations.
    auto x_layer = [&](double scale) {
        for (int q = 0; q < spec.n; ++q)
            c.ops.push_back(GateOp::one(GateKind::RX, q, scale * 2 * spec.field * dt));
    };
    auto zz_layer = [&] {
        for (int q = 0; q + 1 < spec.n; ++q)
            c.ops.push_back(GateOp::two(GateKind::RZZ, q, q + 1, 2 * spec.coupling * dt));
        if (spec.periodic && spec.n > 2)
            c.ops.push_back(GateOp::two(GateKind::RZZ, spec.n - 1, 0, 2 * spec.coupling * dt));
    };
    x_layer(0.5);
    for (int s = 0; s < spec.steps; ++s) {
        zz_layer();
        x_layer(s + 1 < spec.steps ? 1.0 : 0.5);
    }
    for (int q = 0; q < spec.n; ++q) c.measured_qubits.push_back(q);
    return c;
}

Eigen::MatrixXcd tfim_hamiltonian(const TfimSpec& spec) {
    const Eigen::Index dim = Eigen::Index{1} << spec.n;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    auto zz = [&](int a, int b) {
        for (Eigen::Index x = 0; x < dim; ++x) {
            const int za = ((x >> a) & 1) ? -1 : 1;
            const int zb = ((x >> b) & 1) ? -1 : 1;
            h(x, x) += spec.coupling * za * zb;
        }
    };
    for (int q = 0; q + 1 < spec.n; ++q) zz(q, q + 1);
    if (spec.periodic && spec.n > 2) zz(spec.n - 1, 0);
    for (int q = 0; q < spec.n; ++q)
        for (Eigen::Index x = 0; x < dim; ++x)
            h(x ^ (Eigen::Index{1} << q), x) += spec.field;
    return h;
}

// ---------------------------------------------------------------------------
// HHL

namespace {

constexpr int kMaxSolutionQubits = 6; // two-level synthesis cost grows as ~8^n_b

struct HhlPlan {
    int n_b = 0;
    Eigen::VectorXd eigenvalues;       // ascending
    Eigen::MatrixXcd eigenvectors;     // columns
    double t0 = 0;
    double rotation_c = 0;
};

HhlPlan plan_hhl(const HhlProblem& p) {
    const Eigen::Index dim = p.a.rows();
    if (dim < 2 || (dim & (dim - 1)) != 0 || p.a.cols() != dim)
        throw QorchError("invalid-argument", "A must be square with power-of-two dimension");
    if ((p.a - p.a.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw QorchError("invalid-argument", "A must be Hermitian within 1e-12");
    if (p.b.size() != dim) throw QorchError("invalid-argument", "b dimension mismatch");
    if (std::abs(p.b.norm() - 1.0) > 1e-12)
        throw QorchError("invalid-argument", "b must be normalized within 1e-12");
    if (p.n_clock < 1) throw QorchError("invalid-argument", "n_clock must be >= 1");

    HhlPlan plan;
    plan.n_b = static_cast<int>(std::countr_zero(static_cast<uint64_t>(dim)));
    if (plan.n_b > kMaxSolutionQubits)
        throw QorchError("capacity", "exact synthesis supported up to " +
                                         std::to_string(kMaxSolutionQubits) +
                                         " solution qubits");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.a);
    plan.eigenvalues = es.eigenvalues();
    plan.eigenvectors = es.eigenvectors();
    if (plan.eigenvalues.minCoeff() <= 0)
        throw QorchError("invalid-argument", "A must be positive definite");

    const double grid = 2 * M_PI / double(size_t{1} << p.n_clock);
    if (p.evolution_time > 0) {
        plan.t0 = p.evolution_time;
    } else {
        // snap the spectrum onto the clock grid as well as possible: try
        // placing lambda_max on each grid point and keep the best alignment
        const double lmax = plan.eigenvalues.maxCoeff();
        const int cells = (1 << p.n_clock) - 1;
        double best_score = 1e300;
        for (int s = 1; s <= cells; ++s) {
            const double t0 = grid * s / lmax;
            double score = 0;
            bool ok = true;
            for (int i = 0; i < plan.eigenvalues.size(); ++i) {
                const double c = plan.eigenvalues[i] * t0 / grid;
                if (c < 0.5) { ok = false; break; } // would round to clock 0
                const double frac = std::abs(c - std::round(c));
                score += frac * frac;
            }
            if (ok && score < best_score - 1e-15) {
                best_score = score;
                plan.t0 = t0;
            }
        }
        if (plan.t0 <= 0)
            throw QorchError("invalid-argument",
                             "spectrum spread too wide for the clock register");
    }
    for (int i = 0; i < plan.eigenvalues.size(); ++i) {
        const double rescaled = plan.eigenvalues[i] * plan.t0;
        if (rescaled <= 0 || rescaled >= 2 * M_PI)
            throw QorchError("invalid-argument",
                             "rescaled eigenvalues must lie in (0, 2*pi)");
    }

    if (p.rotation_constant > 0) {
        plan.rotation_c = p.rotation_constant;
    } else {
        // 0.9 x the smallest eigenvalue as seen through the clock grid
        double cmin = 1e300;
        for (int i = 0; i < plan.eigenvalues.size(); ++i) {
            const double c = std::max(1.0, std::round(plan.eigenvalues[i] * plan.t0 / grid));
            cmin = std::min(cmin, c * grid / plan.t0);
        }
        plan.rotation_c = 0.9 * cmin;
    }
    return plan;
}

} // namespace

Circuit build_hhl(const HhlProblem& p) {
    const HhlPlan plan = plan_hhl(p);
    const int n_b = plan.n_b, n_c = p.n_clock;
    const int ancilla = n_b + n_c;

    Circuit c;
    c.num_qubits = n_b + n_c + 1;
    c.name = "hhl-" + std::to_string(c.num_qubits);

    std::vector<int> breg, clock;
    for (int q = 0; q < n_b; ++q) breg.push_back(q);
    for (int q = 0; q < n_c; ++q) clock.push_back(n_b + q);

    synth::append_state_prep(c.ops, breg, p.b);

    // phase estimation of U = exp(i A t0): since every controlled power is
    // diagonal in A's eigenbasis, rotate into it once, apply controlled
    // diagonals per clock bit, rotate back
    auto phase_estimation = [&](bool inverse) {
        std::vector<GateOp> ops;
        for (int q : clock) ops.push_back(GateOp::one(GateKind::H, q));
        synth::append_unitary(ops, breg, plan.eigenvectors.adjoint());
        for (int k = 0; k < n_c; ++k) {
            std::vector<int> qs = breg;
            qs.push_back(clock[k]);
            std::vector<double> phases(size_t{1} << (n_b + 1), 0.0);
            for (size_t j = 0; j < (size_t{1} << n_b); ++j)
                phases[j | (size_t{1} << n_b)] =
                    plan.eigenvalues[j] * plan.t0 * double(size_t{1} << k);
            synth::append_diagonal(ops, qs, phases);
        }
        synth::append_unitary(ops, breg, plan.eigenvectors);
        synth::append_iqft(ops, clock);
        if (!inverse) {
            c.ops.insert(c.ops.end(), ops.begin(), ops.end());
        } else {
            for (size_t i = ops.size(); i-- > 0;) c.ops.push_back(inverse_op(ops[i]));
        }
    };

    phase_estimation(false);

    // ancilla rotation: RY(2 asin(C / lambda(c))) multiplexed over the clock
    const double grid = 2 * M_PI / double(size_t{1} << n_c);
    std::vector<double> angles(size_t{1} << n_c, 0.0);
    for (size_t cval = 1; cval < angles.size(); ++cval) {
        const double lambda = cval * grid / plan.t0;
        angles[cval] = 2 * std::asin(std::min(1.0, plan.rotation_c / lambda));
    }
    synth::append_multiplexed_ry(c.ops, clock, ancilla, angles);

    phase_estimation(true);

    c.measured_qubits.push_back(ancilla);
    for (int q : breg) c.measured_qubits.push_back(q);
    return c;
}

Eigen::VectorXd hhl_classical_distribution(const HhlProblem& p) {
    const Eigen::VectorXcd x = p.a.fullPivLu().solve(p.b);
    Eigen::VectorXd d(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) d[i] = std::norm(x[i]);
    return d / d.sum();
}

HhlProblem hhl_benchmark_instance(int total_qubits) {
    if (total_qubits < 3 || total_qubits % 2 == 0)
        throw QorchError("invalid-argument",
                         "benchmark sizes are odd totals 2*n_b + 1 with n_b = n_clock");
    const int n_b = (total_qubits - 1) / 2;
    const Eigen::Index dim = Eigen::Index{1} << n_b;
    HhlProblem p;
    p.a = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        p.a(i, i) = 2.0;
        if (i + 1 < dim) {
            p.a(i, i + 1) = -1.0 / 3.0;
            p.a(i + 1, i) = -1.0 / 3.0;
        }
    }
    p.b = Eigen::VectorXcd::Zero(dim);
    p.b[dim - 1] = 1.0;
    p.n_clock = n_b;
    return p;
}

HhlProblem load_hhl_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QorchError("io", "cannot open " + path);
    nlohmann::json j;
    in >> j;
    const auto& ja = j.at("A");
    const auto dim = static_cast<Eigen::Index>(std::sqrt(double(ja.size())) + 0.5);
    if (dim * dim != static_cast<Eigen::Index>(ja.size()))
        throw QorchError("invalid-argument", "A must be square (row-major [re,im] pairs)");
    HhlProblem p;
    p.a.resize(dim, dim);
    for (Eigen::Index i = 0; i < dim * dim; ++i)
        p.a(i / dim, i % dim) = cplx(ja[i][0].get<double>(), ja[i][1].get<double>());
    const auto& jb = j.at("b");
    if (static_cast<Eigen::Index>(jb.size()) != dim)
        throw QorchError("invalid-argument", "b dimension mismatch");
    p.b.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        p.b[i] = cplx(jb[i][0].get<double>(), jb[i][1].get<double>());
    if (j.contains("n_clock")) p.n_clock = j["n_clock"].get<int>();
    return p;
}

} // namespace qorch
