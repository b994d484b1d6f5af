#include <taulab/bethe.hpp>
#include <taulab/fusion.hpp>
#include <taulab/master.hpp>
#include <taulab/polynomial.hpp>
#include <taulab/spinchain.hpp>
#include <taulab/symfun.hpp>

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace taulab;

namespace {

TimesVector random_times(int kmax, double radius, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> x(-radius, radius);
  TimesVector t(kmax);
  for (int k = 1; k <= kmax; ++k) t.set(k, {x(rng), x(rng)});
  return t;
}

ChainSpec generic3() { return ChainSpec::inhomogeneous({-1.31, 0.07, 1.27}); }

}  // namespace

static void BM_Schur(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto parts = partitions_of(n);
  const TimesVector t = random_times(n, 0.3, 1);
  for (auto _ : state)
    for (const auto& p : parts) benchmark::DoNotOptimize(schur(p, t));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(parts.size()));
}
BENCHMARK(BM_Schur)->Arg(6)->Arg(10)->Arg(14);

static void BM_TransferMatrix(benchmark::State& state) {
  const ChainSpec spec = ChainSpec::homogeneous(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transfer_matrix(spec, {0.3, 0.2}).matrix.data());
}
BENCHMARK(BM_TransferMatrix)->DenseRange(4, 8, 2);

static void BM_JointSpectrum(benchmark::State& state) {
  const ChainSpec spec = ChainSpec::homogeneous(static_cast<int>(state.range(0)));
  const std::vector<cplx> u{{0.3, 0.1}, {-0.7, 0.2}};
  for (auto _ : state) benchmark::DoNotOptimize(simultaneous_labels(spec, u).size());
}
BENCHMARK(BM_JointSpectrum)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

static void BM_BetheSolve(benchmark::State& state) {
  const ChainSpec spec = ChainSpec::homogeneous(static_cast<int>(state.range(0)));
  const int M = spec.L / 2;
  for (auto _ : state) benchmark::DoNotOptimize(solve(spec, M).states.size());
}
BENCHMARK(BM_BetheSolve)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

static void BM_Aberth(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  std::vector<cplx> roots;
  for (int k = 0; k < n; ++k) roots.emplace_back(g(rng), g(rng));
  const Polynomial p = Polynomial::from_roots(roots);
  for (auto _ : state) benchmark::DoNotOptimize(aberth_roots(p).roots.data());
}
BENCHMARK(BM_Aberth)->Arg(3)->Arg(8)->Arg(16);

static void BM_MasterEval(benchmark::State& state) {
  const ChainSpec spec = generic3();
  const auto states = solve(spec, 1).states;
  auto table = std::make_shared<const TTable>(build_ttable(spec, states.front().levels.front(), 0));
  const MasterT m(table);
  const TimesVector t = random_times(6, 0.05, 2);
  for (auto _ : state) benchmark::DoNotOptimize(m.eval({0.4, 0.3}, t).value);
}
BENCHMARK(BM_MasterEval);

static void BM_MasterZeros(benchmark::State& state) {
  const ChainSpec spec = generic3();
  const auto states = solve(spec, 1).states;
  auto table = std::make_shared<const TTable>(build_ttable(spec, states.front().levels.front(), 0));
  const MasterT m(table);
  const TimesVector t = random_times(6, 0.05, 2);
  for (auto _ : state) benchmark::DoNotOptimize(m.zeros(t).data());
}
BENCHMARK(BM_MasterZeros);

static void BM_BuildTTable(benchmark::State& state) {
  const ChainSpec spec = generic3();
  const auto roots = solve(spec, 1).states.front().levels.front();
  TTableOptions opts;
  opts.cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ttable(spec, roots, 0, {}, opts).polys().size());
}
BENCHMARK(BM_BuildTTable)->Arg(16)->Arg(56)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
