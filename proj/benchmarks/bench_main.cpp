#include <benchmark/benchmark.h>

#include "spectral_ends/resonance.hpp"
#include "spectral_ends/solver.hpp"

using namespace spectral_ends;

namespace {

struct Fixture {
  GeometryDesc g;
  DiscreteOperator op;
  InteriorEigenBasis basis;
  std::vector<TransverseBasis> bases;
  NtdData d;
};

const Fixture& bent(int steps) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(steps);
  if (it != cache.end()) return it->second;
  Fixture f;
  f.g = build_preset("bent-waveguide", {});
  Mesh m = generate(f.g, default_h0(f.g));
  for (int i = 0; i < steps; ++i) m = refine(m, f.g);
  f.op = assemble(m, f.g, InterfaceBc::Neumann);
  f.basis = neumann_eigs(f.op, 50.0);
  f.bases = interface_bases(f.g, 20);
  f.d = build_ntd(f.op, f.basis, f.bases, global_order(f.bases, 20), -1.0);
  return cache.emplace(steps, std::move(f)).first->second;
}

void BM_MeshRefine(benchmark::State& state) {
  const GeometryDesc g = build_preset("cshape-cavity", {{"eps", 0.3}});
  for (auto _ : state) {
    Mesh m = generate(g, default_h0(g));
    for (int i = 0; i < state.range(0); ++i) m = refine(m, g);
    benchmark::DoNotOptimize(m.nodes.size());
  }
}
BENCHMARK(BM_MeshRefine)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_NeumannEigs(benchmark::State& state) {
  const Fixture& f = bent(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(neumann_eigs(f.op, 50.0).mu.size());
  state.counters["nodes"] = static_cast<double>(f.op.mesh.nodes.size());
}
BENCHMARK(BM_NeumannEigs)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_InteriorNtd(benchmark::State& state) {
  const Fixture& f = bent(3);
  const SliceSpec all = SliceSpec::full(f.d.M());
  for (auto _ : state) benchmark::DoNotOptimize(interior_ntd(f.d, {2.0, 0.0}, all).norm());
}
BENCHMARK(BM_InteriorNtd);

void BM_FindEigenvalues(benchmark::State& state) {
  const Fixture& f = bent(3);
  SearchOptions opt;
  opt.lo = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(find_eigenvalues(f.d, 0, opt).findings.size());
}
BENCHMARK(BM_FindEigenvalues)->Unit(benchmark::kMillisecond);

void BM_ScanNode(benchmark::State& state) {
  const Fixture& f = bent(3);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_node(f.d, {5.0, -0.01}).cond);
}
BENCHMARK(BM_ScanNode);

void BM_Hankel(benchmark::State& state) {
  const cdouble z{7.3, -0.4};
  for (auto _ : state) {
    for (int n = 0; n <= 20; ++n) benchmark::DoNotOptimize(hankel1(n, z).h);
  }
}
BENCHMARK(BM_Hankel);

}  // namespace

BENCHMARK_MAIN();
