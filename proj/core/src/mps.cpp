#include "qorch/mps.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "qorch/rng.hpp"

namespace qorch {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SvdSplit {
    RowMat u;              // rows x k
    Eigen::VectorXd s;     // k
    RowMat vh;             // k x cols
    double discarded = 0;  // relative discarded weight
};

/// Thin SVD with optional truncation: keep at most chi values, drop values
/// with sigma_i / sigma_0 below threshold, renormalize the kept spectrum.
SvdSplit split(const RowMat& m, int chi, double threshold) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const int full = static_cast<int>(sv.size());

    double total = 0;
    for (int i = 0; i < full; ++i) total += sv[i] * sv[i];

    int keep = std::min(full, chi);
    if (threshold > 0 && sv[0] > 0) {
        while (keep > 1 && sv[keep - 1] / sv[0] < threshold) --keep;
    }
    double kept = 0;
    for (int i = 0; i < keep; ++i) kept += sv[i] * sv[i];

    SvdSplit out;
    out.u = svd.matrixU().leftCols(keep);
    out.vh = svd.matrixV().leftCols(keep).adjoint();
    out.s = sv.head(keep);
    out.discarded = total > 0 ? (total - kept) / total : 0;
    if (kept > 0 && out.discarded > 0) {
        // keep the state normalized after truncation
        out.s *= std::sqrt(total / kept);
    }
    return out;
}

Eigen::Map<RowMat> as_grouped_left(SiteTensor& t) {
    // (l*2) x r view
    return {t.v.data(), static_cast<Eigen::Index>(t.l) * 2, t.r};
}

Eigen::Map<RowMat> as_grouped_right(SiteTensor& t) {
    // l x (2*r) view
    return {t.v.data(), t.l, static_cast<Eigen::Index>(t.r) * 2};
}

} // namespace

MpsState::MpsState(int num_qubits, int chi_max, double trunc_threshold)
    : n_(num_qubits), chi_max_(chi_max), threshold_(trunc_threshold) {
    if (num_qubits < 1) throw QorchError("invalid-argument", "qubit count must be positive");
    if (chi_max < 1) throw QorchError("invalid-argument", "chi_max must be positive");
    if (trunc_threshold < 0)
        throw QorchError("invalid-argument", "trunc_threshold must be non-negative");
    sites_.reserve(n_);
    for (int k = 0; k < n_; ++k) {
        SiteTensor t(1, 1);
        t.at(0, 0, 0) = 1.0;
        sites_.push_back(std::move(t));
    }
}

int MpsState::max_bond_dim() const {
    int m = 1;
    for (int k = 0; k + 1 < n_; ++k) m = std::max(m, sites_[k].r);
    return m;
}

void MpsState::shift_center_right() {
    SiteTensor& t = sites_[center_];
    RowMat m = as_grouped_left(t);
    auto sp = split(m, std::max(t.l * 2, t.r), 0); // exact, no truncation
    const int k = static_cast<int>(sp.s.size());

    SiteTensor nt(t.l, k);
    Eigen::Map<RowMat>(nt.v.data(), t.l * 2, k) = sp.u;
    sites_[center_] = std::move(nt);

    // carry = S * Vh folded into the next site from the left
    RowMat carry = sp.s.asDiagonal() * sp.vh; // k x old_r
    SiteTensor& nxt = sites_[center_ + 1];
    SiteTensor merged(k, nxt.r);
    for (int a = 0; a < k; ++a)
        for (int s = 0; s < 2; ++s)
            for (int b = 0; b < nxt.r; ++b) {
                cplx acc = 0;
                for (int c = 0; c < nxt.l; ++c) acc += carry(a, c) * nxt.at(c, s, b);
                merged.at(a, s, b) = acc;
            }
    sites_[center_ + 1] = std::move(merged);
    ++center_;
}

void MpsState::shift_center_left() {
    SiteTensor& t = sites_[center_];
    RowMat m = as_grouped_right(t);
    auto sp = split(m, std::max(t.l, t.r * 2), 0);
    const int k = static_cast<int>(sp.s.size());

    SiteTensor nt(k, t.r);
    Eigen::Map<RowMat>(nt.v.data(), k, t.r * 2) = sp.vh;
    sites_[center_] = std::move(nt);

    RowMat carry = sp.u * sp.s.asDiagonal(); // old_l x k
    SiteTensor& prv = sites_[center_ - 1];
    SiteTensor merged(prv.l, k);
    for (int a = 0; a < prv.l; ++a)
        for (int s = 0; s < 2; ++s)
            for (int b = 0; b < k; ++b) {
                cplx acc = 0;
                for (int c = 0; c < prv.r; ++c) acc += prv.at(a, s, c) * carry(c, b);
                merged.at(a, s, b) = acc;
            }
    sites_[center_ - 1] = std::move(merged);
    --center_;
}

void MpsState::move_center_to(int k) {
    while (center_ < k) shift_center_right();
    while (center_ > k) shift_center_left();
}

void MpsState::apply_1q(int k, const std::array<cplx, 4>& m) {
    SiteTensor& t = sites_[k];
    for (int a = 0; a < t.l; ++a)
        for (int b = 0; b < t.r; ++b) {
            const cplx v0 = t.at(a, 0, b), v1 = t.at(a, 1, b);
            t.at(a, 0, b) = m[0] * v0 + m[1] * v1;
            t.at(a, 1, b) = m[2] * v0 + m[3] * v1;
        }
}

void MpsState::apply_adjacent(int k, const std::array<cplx, 16>& m) {
    move_center_to(k);
    const SiteTensor& tl = sites_[k];
    const SiteTensor& tr = sites_[k + 1];
    const int l = tl.l, r = tr.r, mid = tl.r;

    // theta[a, s, t, b] with s the left site's physical index (matrix high bit)
    std::vector<cplx> theta(size_t(l) * 4 * r);
    auto th = [&](int a, int st, int b) -> cplx& {
        return theta[(size_t(a) * 4 + st) * r + b];
    };
    for (int a = 0; a < l; ++a)
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t)
                for (int b = 0; b < r; ++b) {
                    cplx acc = 0;
                    for (int c = 0; c < mid; ++c) acc += tl.at(a, s, c) * tr.at(c, t, b);
                    th(a, s * 2 + t, b) = acc;
                }

    std::vector<cplx> out(theta.size());
    for (int a = 0; a < l; ++a)
        for (int b = 0; b < r; ++b)
            for (int u = 0; u < 4; ++u) {
                cplx acc = 0;
                for (int u2 = 0; u2 < 4; ++u2) acc += m[u * 4 + u2] * th(a, u2, b);
                out[(size_t(a) * 4 + u) * r + b] = acc;
            }

    // regroup to ((a,s) x (t,b)) and split
    RowMat grouped(l * 2, 2 * r);
    for (int a = 0; a < l; ++a)
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t)
                for (int b = 0; b < r; ++b)
                    grouped(a * 2 + s, t * r + b) = out[(size_t(a) * 4 + s * 2 + t) * r + b];

    auto sp = split(grouped, chi_max_, threshold_);
    trunc_error_ += sp.discarded;
    const int kept = static_cast<int>(sp.s.size());

    SiteTensor ntl(l, kept);
    Eigen::Map<RowMat>(ntl.v.data(), l * 2, kept) = sp.u;
    SiteTensor ntr(kept, r);
    RowMat right = sp.s.asDiagonal() * sp.vh; // kept x (2*r)
    Eigen::Map<RowMat>(ntr.v.data(), kept, 2 * r) = right;
    sites_[k] = std::move(ntl);
    sites_[k + 1] = std::move(ntr);
    center_ = k + 1;
}

void MpsState::apply(const GateOp& op) {
    for (int q : op.qubits)
        if (q < 0 || q >= n_)
            throw QorchError("invalid-argument", "qubit index out of range");

    if (op.qubits.size() == 1) {
        apply_1q(op.qubits[0], gate_matrix_1q(op.kind, op.params));
        return;
    }

    const auto m = gate_matrix_2q(op.kind, op.params);
    const int a = op.qubits[0], b = op.qubits[1];
    const int lo = std::min(a, b), hi = std::max(a, b);
    const auto swap_m = gate_matrix_2q(GateKind::SWAP, {});

    // route the far qubit next to the near one
    for (int p = hi - 1; p > lo; --p) apply_adjacent(p, swap_m);

    if (a < b) {
        apply_adjacent(lo, m);
    } else {
        // qubits[0] sits on the right site: permute the matrix accordingly
        std::array<cplx, 16> pm;
        auto flip = [](int u) { return ((u & 1) << 1) | (u >> 1); };
        for (int u = 0; u < 4; ++u)
            for (int u2 = 0; u2 < 4; ++u2) pm[u * 4 + u2] = m[flip(u) * 4 + flip(u2)];
        apply_adjacent(lo, pm);
    }

    for (int p = lo + 1; p < hi; ++p) apply_adjacent(p, swap_m);
}

std::map<std::string, uint64_t> MpsState::sample(const std::vector<int>& measured,
                                                 uint64_t shots, uint64_t seed) {
    move_center_to(0); // sites > 0 are right-canonical

    Rng rng(seed);

    // prefix-grouped sampling: shots sharing a prefix share one environment
    struct Node {
        Eigen::VectorXcd env; // conditioned left environment, normalized
        uint64_t count;
        size_t bits; // sampled values of sites 0..k-1, site j at bit j
    };
    std::vector<Node> nodes;
    {
        Eigen::VectorXcd root(1);
        root[0] = 1.0;
        nodes.push_back({std::move(root), shots, 0});
    }

    for (int k = 0; k < n_; ++k) {
        const SiteTensor& t = sites_[k];
        std::vector<Node> next;
        next.reserve(nodes.size() * 2);
        for (auto& node : nodes) {
            Eigen::VectorXcd w0 = Eigen::VectorXcd::Zero(t.r);
            Eigen::VectorXcd w1 = Eigen::VectorXcd::Zero(t.r);
            for (int a = 0; a < t.l; ++a) {
                const cplx e = node.env[a];
                if (e == cplx{}) continue;
                for (int b = 0; b < t.r; ++b) {
                    w0[b] += e * t.at(a, 0, b);
                    w1[b] += e * t.at(a, 1, b);
                }
            }
            const double p0 = w0.squaredNorm();
            const double p1 = w1.squaredNorm();
            const double p = p0 + p1 > 0 ? p0 / (p0 + p1) : 1.0;

            uint64_t zeros = 0;
            for (uint64_t s = 0; s < node.count; ++s)
                if (rng.next_double() < p) ++zeros;

            if (zeros > 0) {
                w0 /= std::sqrt(std::max(p0, 1e-300));
                next.push_back({std::move(w0), zeros, node.bits});
            }
            if (node.count - zeros > 0) {
                w1 /= std::sqrt(std::max(p1, 1e-300));
                next.push_back({std::move(w1), node.count - zeros,
                                node.bits | (size_t{1} << k)});
            }
        }
        nodes = std::move(next);
    }

    std::map<std::string, uint64_t> counts;
    std::string key(measured.size(), '0');
    for (const auto& node : nodes) {
        for (size_t j = 0; j < measured.size(); ++j)
            key[j] = ((node.bits >> measured[j]) & 1) ? '1' : '0';
        counts[key] += node.count;
    }
    return counts;
}

StateVector MpsState::to_statevector() const {
    if (n_ > 20)
        throw QorchError("capacity", "full contraction capped at 20 qubits");
    // partial[x * r + b]: contribution of sites 0..k-1 with sampled bits x
    std::vector<cplx> partial{1.0};
    int r_prev = 1;
    size_t dim = 1;
    for (int k = 0; k < n_; ++k) {
        const SiteTensor& t = sites_[k];
        std::vector<cplx> next(dim * 2 * t.r);
        for (size_t x = 0; x < dim; ++x)
            for (int s = 0; s < 2; ++s)
                for (int b = 0; b < t.r; ++b) {
                    cplx acc = 0;
                    for (int a = 0; a < r_prev; ++a)
                        acc += partial[x * r_prev + a] * t.at(a, s, b);
                    next[(x | (size_t(s) << k)) * t.r + b] = acc;
                }
        partial = std::move(next);
        r_prev = t.r;
        dim *= 2;
    }
    StateVector sv(n_, std::max(n_, StateVector::kDefaultMaxQubits));
    for (size_t x = 0; x < dim; ++x) sv.amplitudes()[x] = partial[x];
    return sv;
}

double MpsState::norm_sq() const {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Ones(1, 1);
    for (int k = 0; k < n_; ++k) {
        const SiteTensor& t = sites_[k];
        Eigen::MatrixXcd ne = Eigen::MatrixXcd::Zero(t.r, t.r);
        for (int s = 0; s < 2; ++s) {
            Eigen::MatrixXcd ts(t.l, t.r);
            for (int a = 0; a < t.l; ++a)
                for (int b = 0; b < t.r; ++b) ts(a, b) = t.at(a, s, b);
            ne += ts.adjoint() * e * ts;
        }
        e = std::move(ne);
    }
    return e(0, 0).real();
}

ExecutionResult mps_run(const Circuit& c, uint64_t shots, uint64_t seed,
                        const MpsOptions& opt, const std::atomic<bool>* cancel) {
    require_valid(c);
    if (shots < 1) throw QorchError("invalid-argument", "shots must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    MpsState mps(c.num_qubits, opt.chi_max, opt.trunc_threshold);
    for (const auto& op : c.ops) {
        if (cancel && cancel->load(std::memory_order_relaxed))
            throw QorchError("cancelled", "execution cancelled");
        mps.apply(op);
    }
    ExecutionResult res;
    res.counts = mps.sample(c.measured_qubits, shots, seed);
    res.shots = shots;
    res.seed = seed;
    res.backend = "mps";
    res.exec_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace qorch
