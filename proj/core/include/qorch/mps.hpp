#pragma once

#include <atomic>
#include <vector>

#include "qorch/circuit.hpp"
#include "qorch/result.hpp"
#include "qorch/statevector.hpp"

namespace qorch {

/// One site of the tensor train: dims (left_bond, 2, right_bond), flat
/// row-major storage.
struct SiteTensor {
    int l = 1, r = 1;
    std::vector<cplx> v;

    SiteTensor() = default;
    SiteTensor(int l, int r) : l(l), r(r), v(size_t(l) * 2 * r) {}

    cplx& at(int a, int s, int b) { return v[(size_t(a) * 2 + s) * r + b]; }
    const cplx& at(int a, int s, int b) const { return v[(size_t(a) * 2 + s) * r + b]; }
};

/// Matrix-product-state simulator with SVD truncation. Two-qubit gates on
/// non-adjacent qubits are routed via SWAP chains. A mixed-canonical form is
/// maintained: sites left of the center are left-canonical, sites right of it
/// right-canonical, which keeps truncation and conditional sampling stable.
class MpsState {
public:
    MpsState(int num_qubits, int chi_max, double trunc_threshold = 1e-12);

    int num_qubits() const { return n_; }
    int chi_max() const { return chi_max_; }
    double trunc_threshold() const { return threshold_; }
    double cumulative_trunc_error() const { return trunc_error_; }
    const SiteTensor& tensor(int k) const { return sites_[k]; }

    /// Bond dimension between sites k and k+1.
    int bond_dim(int k) const { return sites_[k].r; }
    int max_bond_dim() const;

    void apply(const GateOp& op);

    /// Sequential conditional sampling, site by site. Key layout matches
    /// StateVector::sample.
    std::map<std::string, uint64_t> sample(const std::vector<int>& measured,
                                           uint64_t shots, uint64_t seed);

    /// Full contraction of the train; capped at 20 qubits.
    StateVector to_statevector() const;

    /// Squared norm from full contraction of the transfer matrices.
    double norm_sq() const;

private:
    void move_center_to(int k);
    void shift_center_right();
    void shift_center_left();
    void apply_adjacent(int k, const std::array<cplx, 16>& m);
    void apply_1q(int k, const std::array<cplx, 4>& m);

    int n_;
    int chi_max_;
    double threshold_;
    double trunc_error_ = 0;
    int center_ = 0;
    std::vector<SiteTensor> sites_;
};

struct MpsOptions {
    int chi_max = 64;
    double trunc_threshold = 1e-12;
};

ExecutionResult mps_run(const Circuit& c, uint64_t shots, uint64_t seed,
                        const MpsOptions& opt = {},
                        const std::atomic<bool>* cancel = nullptr);

} // namespace qorch
