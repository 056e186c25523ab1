#include <benchmark/benchmark.h>

#include "qhi/identities.hpp"
#include "qhi/pairings.hpp"

using namespace qhi;

namespace {

const Truncation kTrunc{};

void BM_qpoch_inf(benchmark::State& state) {
    const Cplx u(0.8, -0.4), p(0.3, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(qpoch_inf(u, p, kTrunc));
}
BENCHMARK(BM_qpoch_inf);

void BM_theta(benchmark::State& state) {
    const Cplx u(0.8, -0.4), p(0.3, 0.05);
    for (auto _ : state) benchmark::DoNotOptimize(theta(u, p, kTrunc));
}
BENCHMARK(BM_theta);

void BM_phi_series_3phi2(benchmark::State& state) {
    const std::vector<Cplx> a{{0.8, 0.1}, {1.2, -0.2}, {0.5, 0.4}};
    const std::vector<Cplx> b{{0.9, 0.3}, {1.1, -0.1}};
    const Cplx p(0.25, 0.05), z(0.3, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(phi_series(a, b, p, z, kTrunc));
}
BENCHMARK(BM_phi_series_3phi2);

void BM_weight_w_eval(benchmark::State& state) {
    const ParameterSet ps = sample_generic(2, static_cast<int>(state.range(0)), 3);
    const auto comps = enumerate_compositions(ps.n, ps.ell);
    const TermFunction w = tf_weight_w(comps[0], ps, kTrunc);
    std::vector<Cplx> t(ps.ell);
    for (int a = 0; a < ps.ell; ++a) t[a] = Cplx(1.05 + 0.1 * a, 0.3 - 0.2 * a);
    for (auto _ : state) benchmark::DoNotOptimize(w.evaluate(t, ps, kTrunc));
}
BENCHMARK(BM_weight_w_eval)->Arg(1)->Arg(2)->Arg(3);

void BM_exact_residue(benchmark::State& state) {
    const ParameterSet ps = sample_generic(2, static_cast<int>(state.range(0)), 5);
    const auto comps = enumerate_compositions(ps.n, ps.ell);
    const TermFunction h = tf_product(tf_product(tf_weight_W(comps[0], ps, kTrunc),
                                                 tf_weight_w(comps[0], ps, kTrunc)),
                                      tf_phase_phi(ps));
    ResidueWorkspace ws(ps, kTrunc);
    std::vector<int> shifts(ps.ell, 1);
    const ExactPoint pt = exact_ladder(ps, comps[0], shifts, LadderPoint::Base::X);
    for (auto _ : state) benchmark::DoNotOptimize(iterated_residue_exact(h, true, pt, ws));
}
BENCHMARK(BM_exact_residue)->Arg(1)->Arg(2)->Arg(3);

void BM_pairing_I_ell1(benchmark::State& state) {
    const ParameterSet ps = sample_generic(2, 1, 7);
    const auto comps = enumerate_compositions(2, 1);
    const TermFunction W = tf_weight_W(comps[0], ps, kTrunc);
    const TermFunction w = tf_weight_w(comps[1], ps, kTrunc);
    for (auto _ : state) benchmark::DoNotOptimize(pairing_I(W, w, ps, kTrunc));
}
BENCHMARK(BM_pairing_I_ell1);

void BM_matrix_I(benchmark::State& state) {
    const ParameterSet ps = sample_generic(2, static_cast<int>(state.range(0)), 9);
    Truncation tr = kTrunc;
    tr.shell_tail_tol = 1e-9;
    for (auto _ : state) benchmark::DoNotOptimize(matrix_I(ps, tr));
}
BENCHMARK(BM_matrix_I)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_verify_riemann_2_1(benchmark::State& state) {
    const ParameterSet ps = sample_generic(2, 1, 11);
    for (auto _ : state) benchmark::DoNotOptimize(verify_riemann(ps, kTrunc, 1e-7));
}
BENCHMARK(BM_verify_riemann_2_1)->Unit(benchmark::kMillisecond);

}  // namespace
