// Microbenchmarks for the hot paths: dense gate application, tensor-network
// evolution/truncation, sampling, and circuit-text parsing.
#include <benchmark/benchmark.h>

#include "qorch/circuit.hpp"
#include "qorch/mps.hpp"
#include "qorch/statevector.hpp"
#include "qorch/workloads.hpp"

using namespace qorch;

namespace {

void bm_sv_1q_gate(benchmark::State& state) {
    const int n = int(state.range(0));
    StateVector sv(n);
    const GateOp op = GateOp::one(GateKind::RX, n / 2, 0.3);
    for (auto _ : state) {
        sv.apply(op);
        benchmark::DoNotOptimize(sv.amplitudes().data());
    }
    state.SetItemsProcessed(state.iterations() * (int64_t{1} << n));
}
BENCHMARK(bm_sv_1q_gate)->Arg(12)->Arg(18)->Arg(22);

void bm_sv_2q_gate(benchmark::State& state) {
    const int n = int(state.range(0));
    StateVector sv(n);
    const GateOp op = GateOp::two(GateKind::RZZ, 0, n - 1, 0.7);
    for (auto _ : state) {
        sv.apply(op);
        benchmark::DoNotOptimize(sv.amplitudes().data());
    }
    state.SetItemsProcessed(state.iterations() * (int64_t{1} << n));
}
BENCHMARK(bm_sv_2q_gate)->Arg(12)->Arg(18)->Arg(22);

void bm_sv_sample(benchmark::State& state) {
    const int n = int(state.range(0));
    const Circuit c = build_ghz(n);
    StateVector sv(n);
    for (const auto& op : c.ops) sv.apply(op);
    uint64_t seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(sv.sample(c.measured_qubits, 1024, ++seed));
    state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(bm_sv_sample)->Arg(12)->Arg(20);

void bm_mps_tfim_step(benchmark::State& state) {
    const int n = int(state.range(0));
    TfimSpec spec = TfimSpec::defaults(n);
    spec.steps = 1;
    const Circuit c = build_tfim(spec);
    for (auto _ : state) {
        MpsState mps(n, 64, 1e-12);
        for (const auto& op : c.ops) mps.apply(op);
        benchmark::DoNotOptimize(mps.max_bond_dim());
    }
    state.SetItemsProcessed(state.iterations() * int64_t(c.ops.size()));
}
BENCHMARK(bm_mps_tfim_step)->Arg(16)->Arg(32)->Arg(64);

void bm_mps_distant_2q(benchmark::State& state) {
    // the routed (swap-in, apply, swap-out) worst case across the chain
    const int n = int(state.range(0));
    const GateOp op = GateOp::two(GateKind::RZZ, 0, n - 1, 0.4);
    MpsState mps(n, 64, 1e-12);
    for (int q = 0; q < n; ++q) mps.apply(GateOp::one(GateKind::H, q));
    for (auto _ : state) {
        mps.apply(op);
        benchmark::DoNotOptimize(mps.max_bond_dim());
    }
}
BENCHMARK(bm_mps_distant_2q)->Arg(16)->Arg(48);

void bm_parse_circuit(benchmark::State& state) {
    const std::string text = serialize_circuit(build_tfim(TfimSpec::defaults(24)));
    for (auto _ : state) benchmark::DoNotOptimize(parse_circuit_text(text));
    state.SetBytesProcessed(state.iterations() * int64_t(text.size()));
}
BENCHMARK(bm_parse_circuit);

void bm_serialize_circuit(benchmark::State& state) {
    const Circuit c = build_tfim(TfimSpec::defaults(24));
    for (auto _ : state) benchmark::DoNotOptimize(serialize_circuit(c));
}
BENCHMARK(bm_serialize_circuit);

} // namespace

BENCHMARK_MAIN();
