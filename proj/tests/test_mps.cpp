#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qorch/mps.hpp"
#include "qorch/statevector.hpp"
#include "support.hpp"

using namespace qorch;

namespace {

Circuit ghz_circuit(int n) {
    Circuit c;
    c.num_qubits = n;
    c.ops.push_back(GateOp::one(GateKind::H, 0));
    for (int q = 0; q + 1 < n; ++q) c.ops.push_back(GateOp::two(GateKind::CX, q, q + 1));
    for (int q = 0; q < n; ++q) c.measured_qubits.push_back(q);
    return c;
}

double overlap_sq(const MpsState& mps, const StateVector& sv) {
    auto contracted = mps.to_statevector();
    cplx acc = 0;
    for (size_t i = 0; i < sv.amplitudes().size(); ++i)
        acc += std::conj(contracted.amplitudes()[i]) * sv.amplitudes()[i];
    return std::norm(acc);
}

} // namespace

TEST_CASE("initial product state") {
    MpsState mps(4, 8);
    for (int k = 0; k < 4; ++k) {
        const auto& t = mps.tensor(k);
        CHECK(t.l == 1);
        CHECK(t.r == 1);
        CHECK(t.at(0, 0, 0) == cplx{1.0});
        CHECK(t.at(0, 1, 0) == cplx{});
    }
}

TEST_CASE("linear memory at 50 qubits") {
    MpsState mps(50, 16);
    CHECK(mps.num_qubits() == 50);
    CHECK(mps.max_bond_dim() == 1);
}

TEST_CASE("single-qubit ops never grow bonds") {
    MpsState mps(2, 8);
    mps.apply(GateOp::one(GateKind::H, 0));
    CHECK(mps.bond_dim(0) == 1);
}

TEST_CASE("bell state has middle bond 2") {
    MpsState mps(2, 8);
    mps.apply(GateOp::one(GateKind::H, 0));
    mps.apply(GateOp::two(GateKind::CX, 0, 1));
    CHECK(mps.bond_dim(0) == 2);
    auto sv = mps.to_statevector();
    const double isq = 1 / std::sqrt(2.0);
    CHECK(std::abs(sv.amplitudes()[0] - cplx{isq}) < 1e-12);
    CHECK(std::abs(sv.amplitudes()[1]) < 1e-12);
    CHECK(std::abs(sv.amplitudes()[2]) < 1e-12);
    CHECK(std::abs(sv.amplitudes()[3] - cplx{isq}) < 1e-12);
}

TEST_CASE("ghz(8): every internal bond exactly 2, overlap with sv") {
    auto c = ghz_circuit(8);
    MpsState mps(8, 64);
    for (const auto& op : c.ops) mps.apply(op);
    for (int k = 0; k + 1 < 8; ++k) CHECK(mps.bond_dim(k) == 2);

    StateVector sv(8);
    for (const auto& op : c.ops) sv.apply(op);
    CHECK(overlap_sq(mps, sv) >= 1 - 1e-10);
}

TEST_CASE("chi_max=1 behaves as a product-state simulator") {
    MpsState mps(3, 1);
    mps.apply(GateOp::one(GateKind::H, 0));
    mps.apply(GateOp::two(GateKind::CX, 0, 1));
    CHECK(mps.max_bond_dim() == 1);
    CHECK(mps.cumulative_trunc_error() > 0);
    CHECK(std::abs(mps.norm_sq() - 1.0) < 1e-8);
}

TEST_CASE("product state sampling is deterministic all-ones pattern") {
    MpsState mps(4, 4);
    mps.apply(GateOp::one(GateKind::X, 1));
    mps.apply(GateOp::one(GateKind::X, 3));
    auto counts = mps.sample({0, 1, 2, 3}, 500, 3);
    CHECK(counts.at("0101") == 500);
}

TEST_CASE("ghz(6) sampling support via mps") {
    auto c = ghz_circuit(6);
    auto res = mps_run(c, 2000, 5, {.chi_max = 8});
    uint64_t total = 0;
    for (const auto& [key, count] : res.counts) {
        CHECK((key == "000000" || key == "111111"));
        total += count;
    }
    CHECK(total == 2000);
}

TEST_CASE("mps sampling is seed-deterministic") {
    std::mt19937_64 rng(17);
    auto c = testsupport::random_circuit(rng, 6, 25);
    auto a = mps_run(c, 1000, 99, {.chi_max = 64});
    auto b = mps_run(c, 1000, 99, {.chi_max = 64});
    CHECK(a.counts == b.counts);
}

TEST_CASE("untruncated mps matches sv on random circuits") {
    std::mt19937_64 rng(23);
    for (int iter = 0; iter < 20; ++iter) {
        const int n = 2 + int(rng() % 5);
        auto c = testsupport::random_circuit(rng, n, 40);
        MpsState mps(n, 1 << (n / 2 + 1), 0.0);
        StateVector sv(n);
        for (const auto& op : c.ops) {
            mps.apply(op);
            sv.apply(op);
        }
        CHECK(overlap_sq(mps, sv) >= 1 - 1e-10);
        // elementwise up to global phase
        auto contracted = mps.to_statevector();
        cplx phase = 1;
        for (size_t i = 0; i < sv.amplitudes().size(); ++i)
            if (std::abs(sv.amplitudes()[i]) > 0.1) {
                phase = contracted.amplitudes()[i] / sv.amplitudes()[i];
                break;
            }
        for (size_t i = 0; i < sv.amplitudes().size(); ++i)
            CHECK(std::abs(contracted.amplitudes()[i] - phase * sv.amplitudes()[i]) < 1e-9);
    }
}

TEST_CASE("sampled distribution close to sv distribution on shallow circuits") {
    std::mt19937_64 rng(31);
    auto c = testsupport::random_circuit(rng, 8, 24);
    auto mres = mps_run(c, 100000, 42, {.chi_max = 256, .trunc_threshold = 0});
    StateVector sv(8);
    for (const auto& op : c.ops) sv.apply(op);
    CHECK(testsupport::tv_vs_exact(mres.counts, sv.probabilities(), c.measured_qubits) <= 0.02);
}

TEST_CASE("bond cap respected and truncation error monotone") {
    std::mt19937_64 rng(37);
    auto c = testsupport::random_circuit(rng, 8, 200);
    MpsState mps(8, 4, 1e-12);
    double prev = 0;
    for (const auto& op : c.ops) {
        mps.apply(op);
        CHECK(mps.max_bond_dim() <= 4);
        CHECK(mps.cumulative_trunc_error() >= prev);
        prev = mps.cumulative_trunc_error();
        CHECK(std::abs(mps.norm_sq() - 1.0) < 1e-8);
    }
    CHECK(prev > 0); // deep random circuit at chi=4 must truncate
}

TEST_CASE("to_statevector caps at 20 qubits") {
    MpsState mps(21, 2);
    CHECK_THROWS_AS(mps.to_statevector(), QorchError);
}

TEST_CASE("|0...0> contraction") {
    MpsState mps(5, 2);
    auto sv = mps.to_statevector();
    CHECK(std::abs(sv.amplitudes()[0] - cplx{1.0}) < 1e-15);
}
