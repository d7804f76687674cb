#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qorch/statevector.hpp"
#include "support.hpp"

using namespace qorch;

TEST_CASE("initial state is |0...0>") {
    StateVector sv(3);
    CHECK(sv.amplitudes()[0] == cplx{1.0});
    for (size_t i = 1; i < 8; ++i) CHECK(sv.amplitudes()[i] == cplx{});
}

TEST_CASE("capacity error above the cap") {
    CHECK_THROWS_AS(StateVector(27, 26), QorchError);
    try {
        StateVector sv(27, 26);
    } catch (const QorchError& e) {
        CHECK(e.code == "capacity");
    }
}

TEST_CASE("hadamard on |0>") {
    StateVector sv(1);
    sv.apply(GateOp::one(GateKind::H, 0));
    CHECK(std::abs(sv.amplitudes()[0].real() - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(sv.amplitudes()[1].real() - 1 / std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("cx maps |10> to |11>") {
    StateVector sv(2);
    sv.apply(GateOp::one(GateKind::X, 0)); // qubit 0 (control) set
    sv.apply(GateOp::two(GateKind::CX, 0, 1));
    CHECK(std::abs(sv.amplitudes()[3] - cplx{1.0}) < 1e-15); // |11> = index 3
}

TEST_CASE("every gate matches the full-matrix oracle on random states") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1, 1);
    for (GateKind k : testsupport::all_kinds()) {
        const int n = 3;
        GateOp op;
        op.kind = k;
        op.qubits = gate_arity(k) == 1 ? std::vector<int>{1} : std::vector<int>{2, 0};
        if (gate_has_angle(k)) op.params.push_back(u(rng) * M_PI);

        StateVector sv(n);
        Eigen::VectorXcd psi(8);
        for (int i = 0; i < 8; ++i) psi[i] = cplx(u(rng), u(rng));
        psi.normalize();
        for (int i = 0; i < 8; ++i) sv.amplitudes()[i] = psi[i];

        sv.apply(op);
        Eigen::VectorXcd expect = testsupport::full_matrix(op, n) * psi;
        for (int i = 0; i < 8; ++i)
            CHECK(std::abs(sv.amplitudes()[i] - expect[i]) < 1e-12);
    }
}

TEST_CASE("rzz(pi) on |00> is a global phase") {
    StateVector sv(2);
    sv.apply(GateOp::two(GateKind::RZZ, 0, 1, M_PI));
    // density-matrix equality: |a|^2 pattern and relative phases vs oracle
    auto psi = testsupport::run_full_matrix(
        Circuit{2, {GateOp::two(GateKind::RZZ, 0, 1, M_PI)}, {}, ""});
    Eigen::Vector4cd got;
    for (int i = 0; i < 4; ++i) got[i] = sv.amplitudes()[i];
    Eigen::Matrix4cd rho_got = got * got.adjoint();
    Eigen::Matrix4cd rho_want = psi * psi.adjoint();
    CHECK((rho_got - rho_want).norm() < 1e-12);
    // and it is |00> up to phase
    CHECK(std::abs(std::abs(got[0]) - 1.0) < 1e-12);
}

TEST_CASE("oracle equivalence on random circuits up to 6 qubits") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 30; ++iter) {
        const int n = 2 + int(rng() % 5);
        auto c = testsupport::random_circuit(rng, n, 30);
        StateVector sv(n);
        for (const auto& op : c.ops) sv.apply(op);
        auto expect = testsupport::run_full_matrix(c);
        for (size_t i = 0; i < sv.amplitudes().size(); ++i)
            CHECK(std::abs(sv.amplitudes()[i] - expect[i]) < 1e-9);
    }
}

TEST_CASE("norm preserved over 10^4 ops") {
    std::mt19937_64 rng(11);
    auto c = testsupport::random_circuit(rng, 6, 10000);
    StateVector sv(6);
    for (const auto& op : c.ops) sv.apply(op);
    CHECK(std::abs(sv.norm_sq() - 1.0) < 1e-8);
}

TEST_CASE("op then inverse restores the state") {
    std::mt19937_64 rng(13);
    auto c = testsupport::random_circuit(rng, 4, 20);
    StateVector sv(4);
    for (const auto& op : c.ops) sv.apply(op);
    auto before = sv.amplitudes();
    for (const auto& op : c.ops) {
        sv.apply(op);
        sv.apply(inverse_op(op));
    }
    for (size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(sv.amplitudes()[i] - before[i]) < 1e-10);
}

TEST_CASE("ghz sampling support") {
    auto c = parse_circuit_text(
        "qreg q[4]; h q[0]; cx q[0],q[1]; cx q[1],q[2]; cx q[2],q[3]; measure q;");
    auto res = sv_run(c, 1000, 77);
    uint64_t total = 0;
    for (const auto& [key, count] : res.counts) {
        CHECK((key == "0000" || key == "1111"));
        total += count;
    }
    CHECK(total == 1000);
}

TEST_CASE("empty circuit samples all zeros") {
    auto c = parse_circuit_text("qreg q[2]; measure q;");
    auto res = sv_run(c, 5, 1);
    CHECK(res.counts.at("00") == 5);
}

TEST_CASE("sampling is seed-deterministic") {
    std::mt19937_64 rng(3);
    auto c = testsupport::random_circuit(rng, 5, 25);
    auto a = sv_run(c, 2000, 123);
    auto b = sv_run(c, 2000, 123);
    auto d = sv_run(c, 2000, 124);
    CHECK(a.counts == b.counts);
    CHECK(a.counts != d.counts); // overwhelmingly likely for a spread state
}

TEST_CASE("sampled frequencies within 3 sigma of exact probabilities") {
    // TFIM-like circuit: alternating rzz/rx layers
    Circuit c;
    c.num_qubits = 4;
    for (int step = 0; step < 3; ++step) {
        for (int q = 0; q + 1 < 4; ++q)
            c.ops.push_back(GateOp::two(GateKind::RZZ, q, q + 1, 0.5));
        for (int q = 0; q < 4; ++q) c.ops.push_back(GateOp::one(GateKind::RX, q, 0.5));
    }
    for (int q = 0; q < 4; ++q) c.measured_qubits.push_back(q);

    const uint64_t shots = 100000;
    StateVector sv(4);
    for (const auto& op : c.ops) sv.apply(op);
    auto probs = sv.probabilities();
    auto res = sv_run(c, shots, 2024);
    for (size_t i = 0; i < probs.size(); ++i) {
        std::string key(4, '0');
        for (int j = 0; j < 4; ++j) key[j] = ((i >> j) & 1) ? '1' : '0';
        auto it = res.counts.find(key);
        const double freq = it == res.counts.end() ? 0.0 : double(it->second) / shots;
        const double sigma = std::sqrt(probs[i] * (1 - probs[i]) / shots);
        CHECK(std::abs(freq - probs[i]) <= 3 * sigma + 1e-9);
    }
}

TEST_CASE("expectation of Z strings") {
    StateVector sv(1);
    CHECK(sv.expectation_zi("Z") == doctest::Approx(1.0));
    sv.apply(GateOp::one(GateKind::H, 0));
    CHECK(std::abs(sv.expectation_zi("Z")) < 1e-12);
}

TEST_CASE("expectation matches brute-force summation on a random state") {
    std::mt19937_64 rng(21);
    auto c = testsupport::random_circuit(rng, 5, 30);
    StateVector sv(5);
    for (const auto& op : c.ops) sv.apply(op);

    const std::string pauli = "ZIZIZ";
    double expect = 0;
    for (size_t i = 0; i < 32; ++i) {
        int sign = 1;
        for (int q = 0; q < 5; ++q)
            if (pauli[q] == 'Z' && ((i >> q) & 1)) sign = -sign;
        expect += sign * std::norm(sv.amplitudes()[i]);
    }
    CHECK(sv.expectation_zi(pauli) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(sv.expectation_zi("ZZ"), QorchError);
}
