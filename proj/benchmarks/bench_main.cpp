#include "lowmach/compressible_solver.hpp"
#include "lowmach/jensen.hpp"
#include "lowmach/relaxed_operator.hpp"
#include "lowmach/young_measure.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace lowmach;

static void BM_SolverStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Params p;
  p.eps = 0.01;
  FieldState s = init_recipe(InitRecipe{}, n, p);
  for (auto _ : state) {
    s = step(s, p, 0.4);
    benchmark::DoNotOptimize(s.rho.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_SolverStep)->Arg(32)->Arg(64)->Arg(128);

static void BM_WaveConeMembership(benchmark::State& state) {
  const OperatorAE op(2);
  const RelaxedState dz = lift_S({Eigen::Vector2d(1, 0), 1.0}) - lift_S({Eigen::Vector2d(0, 0), 0.0});
  WaveConeOptions o;
  o.sweep_per_angle = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(wave_cone_membership(op, dz, o).min_singular_value);
}
BENCHMARK(BM_WaveConeMembership)->Arg(16)->Arg(64);

static void BM_ConstantRank(benchmark::State& state) {
  const OperatorAE op(2);
  for (auto _ : state) benchmark::DoNotOptimize(constant_rank_check(op, 1000, 1).rank);
}
BENCHMARK(BM_ConstantRank);

static void BM_EnvelopeLaminate(benchmark::State& state) {
  const OperatorAE op(2);
  const Eigen::VectorXd z = lift_S({Eigen::Vector2d(0.3, -0.2), 0.4}).vector();
  const auto f = jensen::default_dictionary(2, Eigen::Vector2d(0, 0), 0.0).entries.back().eval;
  jensen::LaminateOptions o;
  o.depth = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(jensen::envelope_upper_laminate(op, f, z, o).value);
}
BENCHMARK(BM_EnvelopeLaminate)->Arg(1)->Arg(2);

static void BM_EnvelopePlaneWave(benchmark::State& state) {
  const OperatorAE op(2);
  const Eigen::VectorXd z = lift_S({Eigen::Vector2d(0.3, -0.2), 0.4}).vector();
  const auto f = jensen::default_dictionary(2, Eigen::Vector2d(0, 0), 0.0).entries.back().eval;
  jensen::PlaneWaveOptions o;
  o.quad_points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(jensen::envelope_upper_planewave(op, f, z, o).value);
}
BENCHMARK(BM_EnvelopePlaneWave)->Arg(16)->Arg(32);

static void BM_YmDistance(benchmark::State& state) {
  young::SpacetimeGrid g;
  g.n = static_cast<int>(state.range(0));
  g.T = 1.0;
  for (int j = 0; j <= 8; ++j) g.times.push_back(j / 8.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  auto measure = [&] {
    std::vector<young::AtomicMeasure> cells;
    for (long c = 0; c < g.total_cells(); ++c)
      cells.emplace_back(std::vector<young::Atom>{{0.5, Eigen::Vector3d(U(rng), U(rng), U(rng))},
                                                 {0.5, Eigen::Vector3d(U(rng), U(rng), U(rng))}});
    return young::YoungMeasure(g, 3, cells);
  };
  const auto a = measure(), b = measure();
  const auto dict = young::TestDictionary::monomials(3, 4, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(young::ym_distance(a, b, dict));
}
BENCHMARK(BM_YmDistance)->Arg(8)->Arg(16);

static void BM_PressureFromVelocity(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> S(static_cast<std::size_t>(n * n * 4), 0.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-1, 1);
  for (auto& v : S) v = U(rng);
  for (auto _ : state) benchmark::DoNotOptimize(young::pressure_from_velocity(n, 2, S).data());
}
BENCHMARK(BM_PressureFromVelocity)->Arg(64)->Arg(128);

BENCHMARK_MAIN();
