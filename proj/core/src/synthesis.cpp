#include "qorch/synthesis.hpp"

#include <bit>
#include <cmath>

#include "qorch/result.hpp"

namespace qorch::synth {

namespace {

constexpr double kCoeffEps = 1e-12;

/// exp(i * theta * Z_S) for the Z-product over `members` (subset of qubits).
void append_z_product(std::vector<GateOp>& ops, const std::vector<int>& members,
                      double theta) {
    if (members.size() == 1) {
        ops.push_back(GateOp::one(GateKind::RZ, members[0], -2 * theta));
        return;
    }
    if (members.size() == 2) {
        ops.push_back(GateOp::two(GateKind::RZZ, members[0], members[1], -2 * theta));
        return;
    }
    // accumulate the parity into the last member, rotate, uncompute
    const int last = members.back();
    for (size_t i = 0; i + 1 < members.size(); ++i)
        ops.push_back(GateOp::two(GateKind::CX, members[i], last));
    ops.push_back(GateOp::one(GateKind::RZ, last, -2 * theta));
    for (size_t i = members.size() - 1; i-- > 0;)
        ops.push_back(GateOp::two(GateKind::CX, members[i], last));
}

} // namespace

void append_diagonal(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                     const std::vector<double>& phases) {
    const size_t q = qubits.size();
    const size_t dim = size_t{1} << q;
    if (phases.size() != dim)
        throw QorchError("invalid-argument", "phase vector length must be 2^q");

    // Walsh-Hadamard transform: coeff[S] = 2^-q * sum_x phases[x] * (-1)^|x&S|
    std::vector<double> coeff = phases;
    for (size_t len = 1; len < dim; len <<= 1)
        for (size_t i = 0; i < dim; i += len << 1)
            for (size_t j = i; j < i + len; ++j) {
                const double a = coeff[j], b = coeff[j + len];
                coeff[j] = a + b;
                coeff[j + len] = a - b;
            }
    for (auto& c : coeff) c /= double(dim);

    // phases[x] = coeff[0] + sum_{S != 0} coeff[S] * prod_{i in S} (-1)^x_i,
    // i.e. each S contributes exp(i * coeff[S] * Z_S); coeff[0] is global.
    for (size_t s = 1; s < dim; ++s) {
        if (std::abs(coeff[s]) < kCoeffEps) continue;
        std::vector<int> members;
        for (size_t j = 0; j < q; ++j)
            if (s & (size_t{1} << j)) members.push_back(qubits[j]);
        append_z_product(ops, members, coeff[s]);
    }
}

void append_multiplexed_ry(std::vector<GateOp>& ops, const std::vector<int>& controls,
                           int target, const std::vector<double>& angles) {
    const size_t k = controls.size();
    if (angles.size() != (size_t{1} << k))
        throw QorchError("invalid-argument", "angle vector length must be 2^k");
    if (k == 0) {
        if (std::abs(angles[0]) > kCoeffEps)
            ops.push_back(GateOp::one(GateKind::RY, target, angles[0]));
        return;
    }
    // split on the most significant control:
    //   M(A) = M((a+b)/2) . CX . M((a-b)/2) . CX
    const size_t half = size_t{1} << (k - 1);
    std::vector<double> sum(half), diff(half);
    for (size_t c = 0; c < half; ++c) {
        sum[c] = (angles[c] + angles[c + half]) / 2;
        diff[c] = (angles[c] - angles[c + half]) / 2;
    }
    const std::vector<int> rest(controls.begin(), controls.end() - 1);
    const int msb = controls.back();
    ops.push_back(GateOp::two(GateKind::CX, msb, target));
    append_multiplexed_ry(ops, rest, target, diff);
    ops.push_back(GateOp::two(GateKind::CX, msb, target));
    append_multiplexed_ry(ops, rest, target, sum);
}

void append_controlled_1q(std::vector<GateOp>& ops, const std::vector<int>& controls,
                          size_t polarity, int target, const Eigen::Matrix2cd& u) {
    // ZYZ decomposition: u = e^{i alpha} RZ(beta) RY(gamma) RZ(delta)
    const cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const double alpha = std::arg(det) / 2;
    const Eigen::Matrix2cd su = u * std::exp(cplx(0, -alpha));
    const double gamma = 2 * std::atan2(std::abs(su(1, 0)), std::abs(su(0, 0)));
    double beta = 0, delta = 0;
    if (std::abs(su(0, 0)) > 1e-14 && std::abs(su(1, 0)) > 1e-14) {
        const double bpd = -2 * std::arg(su(0, 0));
        const double bmd = 2 * std::arg(su(1, 0));
        beta = (bpd + bmd) / 2;
        delta = (bpd - bmd) / 2;
    } else if (std::abs(su(0, 0)) > 1e-14) {
        beta = -2 * std::arg(su(0, 0)); // diagonal: fold everything into beta
    } else {
        beta = 2 * std::arg(su(1, 0)); // anti-diagonal
    }

    const size_t k = controls.size();
    if (k == 0) {
        // uncontrolled: alpha is a global phase
        if (std::abs(delta) > kCoeffEps) ops.push_back(GateOp::one(GateKind::RZ, target, delta));
        if (std::abs(gamma) > kCoeffEps) ops.push_back(GateOp::one(GateKind::RY, target, gamma));
        if (std::abs(beta) > kCoeffEps) ops.push_back(GateOp::one(GateKind::RZ, target, beta));
        return;
    }

    const size_t cdim = size_t{1} << k;
    auto selected_rz = [&](double theta) {
        // RZ(theta) on target, applied only on the selected control assignment
        if (std::abs(theta) < kCoeffEps) return;
        std::vector<int> qs = controls;
        qs.push_back(target);
        std::vector<double> phases(cdim * 2, 0.0);
        phases[polarity] = -theta / 2;            // target = 0
        phases[polarity | cdim] = theta / 2;      // target = 1
        append_diagonal(ops, qs, phases);
    };
    auto selected_ry = [&](double theta) {
        if (std::abs(theta) < kCoeffEps) return;
        // RY = (S H) RZ (S H)^dagger on the target
        ops.push_back(GateOp::one(GateKind::Sdg, target));
        ops.push_back(GateOp::one(GateKind::H, target));
        selected_rz(theta);
        ops.push_back(GateOp::one(GateKind::H, target));
        ops.push_back(GateOp::one(GateKind::S, target));
    };

    selected_rz(delta);
    selected_ry(gamma);
    selected_rz(beta);
    if (std::abs(alpha) > kCoeffEps) {
        // conditioned phase lives on the controls alone
        std::vector<double> phases(cdim, 0.0);
        phases[polarity] = alpha;
        append_diagonal(ops, controls, phases);
    }
}

namespace {

/// Two-level unitary mixing basis states i and j (acting as identity
/// elsewhere), with g given in the ordered (i, j) basis.
void append_two_level(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                      size_t i, size_t j, const Eigen::Matrix2cd& g) {
    const size_t q = qubits.size();
    size_t diff = i ^ j;
    std::vector<int> diff_bits;
    for (size_t b = 0; b < q; ++b)
        if (diff & (size_t{1} << b)) diff_bits.push_back(static_cast<int>(b));

    const int t = diff_bits[0];

    // Gray-code routing: flip the remaining differing bits of j one at a
    // time (each flip is a multi-controlled X), reducing to a pair that
    // differs only in bit t.
    std::vector<GateOp> chain;
    size_t cur = j;
    for (size_t s = 1; s < diff_bits.size(); ++s) {
        const int fb = diff_bits[s];
        // controlled-X on fb, conditioned on every other bit of cur
        std::vector<int> ctrls;
        size_t pol = 0;
        for (size_t b = 0; b < q; ++b) {
            if (static_cast<int>(b) == fb) continue;
            if (cur & (size_t{1} << b)) pol |= size_t{1} << ctrls.size();
            ctrls.push_back(qubits[b]);
        }
        std::vector<GateOp> step;
        step.push_back(GateOp::one(GateKind::H, qubits[fb]));
        {
            std::vector<int> qs = ctrls;
            qs.push_back(qubits[fb]);
            std::vector<double> phases(size_t{1} << qs.size(), 0.0);
            phases[pol | (size_t{1} << ctrls.size())] = M_PI;
            append_diagonal(step, qs, phases);
        }
        step.push_back(GateOp::one(GateKind::H, qubits[fb]));
        chain.insert(chain.end(), step.begin(), step.end());
        cur ^= size_t{1} << fb;
    }

    // cur differs from i only in bit t now
    std::vector<int> ctrls;
    size_t pol = 0;
    for (size_t b = 0; b < q; ++b) {
        if (static_cast<int>(b) == static_cast<size_t>(t)) continue;
        if (i & (size_t{1} << b)) pol |= size_t{1} << ctrls.size();
        ctrls.push_back(qubits[b]);
    }
    Eigen::Matrix2cd u = g;
    if (i & (size_t{1} << t)) {
        // i occupies the target=1 row: swap basis roles
        Eigen::Matrix2cd p;
        p << 0, 1, 1, 0;
        u = p * g * p;
    }

    for (const auto& op : chain) ops.push_back(op);
    append_controlled_1q(ops, ctrls, pol, qubits[t], u);
    for (size_t s = chain.size(); s-- > 0;) ops.push_back(chain[s]);
}

} // namespace

void append_unitary(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                    const Eigen::MatrixXcd& u) {
    const size_t q = qubits.size();
    const Eigen::Index dim = Eigen::Index{1} << q;
    if (u.rows() != dim || u.cols() != dim)
        throw QorchError("invalid-argument", "unitary dimension mismatch");
    if ((u * u.adjoint() - Eigen::MatrixXcd::Identity(dim, dim)).norm() > 1e-9 * dim)
        throw QorchError("invalid-argument", "matrix is not unitary");

    // reduce U to a diagonal by Givens rotations on adjacent rows
    Eigen::MatrixXcd m = u;
    struct Rot {
        size_t i, j;
        Eigen::Matrix2cd g;
    };
    std::vector<Rot> rots;
    for (Eigen::Index c = 0; c < dim - 1; ++c) {
        for (Eigen::Index r = dim - 1; r > c; --r) {
            const cplx a = m(r - 1, c), b = m(r, c);
            if (std::abs(b) < 1e-14) continue;
            const double n = std::sqrt(std::norm(a) + std::norm(b));
            Eigen::Matrix2cd g;
            g << std::conj(a) / n, std::conj(b) / n, -b / n, a / n;
            const Eigen::RowVectorXcd top = m.row(r - 1);
            const Eigen::RowVectorXcd bot = m.row(r);
            m.row(r - 1) = g(0, 0) * top + g(0, 1) * bot;
            m.row(r) = g(1, 0) * top + g(1, 1) * bot;
            rots.push_back({size_t(r - 1), size_t(r), g});
        }
    }

    // m is now diagonal: U = G_1^+ ... G_K^+ D, so apply D first, then the
    // adjoints in reverse order of recording
    std::vector<double> phases(dim);
    for (Eigen::Index x = 0; x < dim; ++x) phases[x] = std::arg(m(x, x));
    append_diagonal(ops, qubits, phases);
    for (size_t k = rots.size(); k-- > 0;)
        append_two_level(ops, qubits, rots[k].i, rots[k].j, rots[k].g.adjoint());
}

void append_state_prep(std::vector<GateOp>& ops, const std::vector<int>& qubits,
                       const Eigen::VectorXcd& v) {
    const size_t q = qubits.size();
    const Eigen::Index dim = Eigen::Index{1} << q;
    if (v.size() != dim) throw QorchError("invalid-argument", "state dimension mismatch");
    if (std::abs(v.squaredNorm() - 1.0) > 1e-10)
        throw QorchError("invalid-argument", "state must be normalized");

    // reduce v to e_0 with Givens rotations, then emit the inverse sequence
    Eigen::VectorXcd w = v;
    struct Rot {
        size_t i, j;
        Eigen::Matrix2cd g;
    };
    std::vector<Rot> rots;
    for (Eigen::Index r = dim - 1; r > 0; --r) {
        const cplx a = w[r - 1], b = w[r];
        if (std::abs(b) < 1e-14) continue;
        const double n = std::sqrt(std::norm(a) + std::norm(b));
        Eigen::Matrix2cd g;
        g << std::conj(a) / n, std::conj(b) / n, -b / n, a / n;
        w[r - 1] = n;
        w[r] = 0;
        rots.push_back({size_t(r - 1), size_t(r), g});
    }
    // v = G_1^+ ... G_K^+ (phase * e_0); the leftover phase on e_0 is global
    for (size_t k = rots.size(); k-- > 0;)
        append_two_level(ops, qubits, rots[k].i, rots[k].j, rots[k].g.adjoint());
}

void append_qft(std::vector<GateOp>& ops, const std::vector<int>& qubits) {
    const int n = static_cast<int>(qubits.size());
    for (int j = n - 1; j >= 0; --j) {
        ops.push_back(GateOp::one(GateKind::H, qubits[j]));
        for (int k = j - 1; k >= 0; --k)
            ops.push_back(GateOp::two(GateKind::CP, qubits[k], qubits[j],
                                      M_PI / double(size_t{1} << (j - k))));
    }
    for (int i = 0; i < n / 2; ++i)
        ops.push_back(GateOp::two(GateKind::SWAP, qubits[i], qubits[n - 1 - i]));
}

void append_iqft(std::vector<GateOp>& ops, const std::vector<int>& qubits) {
    std::vector<GateOp> fwd;
    append_qft(fwd, qubits);
    for (size_t k = fwd.size(); k-- > 0;) ops.push_back(inverse_op(fwd[k]));
}

} // namespace qorch::synth
