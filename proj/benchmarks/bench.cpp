#include <benchmark/benchmark.h>

#include "uclab/doubling.hpp"
#include "uclab/gmt.hpp"
#include "uclab/propagation.hpp"
#include "uclab/zoo.hpp"

using namespace uclab;
using harmonic::HarmonicFunction;

namespace {

HarmonicFunction basis(int n, int d) { return HarmonicFunction::from_polynomial(zoo::homogeneous_basis(n, d).front()); }

void BM_SupGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto u = basis(n, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(harmonic::sup_grad(u, harmonic::Ball(Point::filled(n, 0.1), 0.3), {1e-6}));
  }
}
BENCHMARK(BM_SupGrad)->Args({2, 4})->Args({2, 10})->Args({3, 4})->Args({3, 10});

void BM_DoublingIndex(benchmark::State& state) {
  const auto u = basis(3, 6);
  for (auto _ : state) benchmark::DoNotOptimize(doubling::doubling_index(u, Point::filled(3, 0.05), 0.2, {1e-5}));
}
BENCHMARK(BM_DoublingIndex);

void BM_MaximalDoubling(benchmark::State& state) {
  const auto u = basis(2, 6);
  doubling::MaximalOptions mo;
  mo.grid_density = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(doubling::maximal_doubling(u, lattice::Cube::unit(2), mo));
}
BENCHMARK(BM_MaximalDoubling)->Arg(3)->Arg(9);

void BM_SegmentEnergy(benchmark::State& state) {
  const auto face = lattice::GridSet::from_predicate(2, state.range(0), true, [](const Point&) { return true; });
  const auto mu = gmt::DiscreteMeasure::uniform_on(face);
  for (auto _ : state) benchmark::DoNotOptimize(gmt::riesz_energy(mu, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SegmentEnergy)->Arg(243)->Arg(729)->Arg(2187)->Complexity(benchmark::oNSquared);

void BM_CantorContent(benchmark::State& state) {
  const auto e = gmt::cantor_product({0.6309297535714574, 0.6309297535714574}, static_cast<int>(state.range(0)), false);
  for (auto _ : state) benchmark::DoNotOptimize(gmt::hausdorff_content(e, 1.26));
}
BENCHMARK(BM_CantorContent)->Arg(3)->Arg(5);

void BM_Census(benchmark::State& state) {
  const auto u = basis(2, 5);
  propagation::CensusOptions co;
  co.classify.maximal.grid_density = 3;
  co.classify.maximal.rungs = 3;
  for (auto _ : state) benchmark::DoNotOptimize(propagation::bad_cube_census(u, lattice::Cube::unit(2), 4, 5.0, 1, co));
}
BENCHMARK(BM_Census)->Unit(benchmark::kMillisecond);

void BM_Recursion(benchmark::State& state) {
  propagation::RecursionParams p;
  const auto b = propagation::Boundary::exponential(2.0, 1.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(propagation::recursion_simulate(p, b, {}));
}
BENCHMARK(BM_Recursion)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
