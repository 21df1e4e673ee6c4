#include <benchmark/benchmark.h>

#include "gridabs/abstraction.hpp"
#include "gridabs/models.hpp"
#include "gridabs/optimizer.hpp"
#include "gridabs/random.hpp"

using namespace gridabs;

namespace {

Matrix random_metzler(Rng& rng, Eigen::Index n) {
  Matrix l(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) l(i, j) = i == j ? rng.uniform(-2, 2) : (rng.coin(0.5) ? 0.0 : rng.uniform(0, 2));
  return l;
}

Plant validation_plant() {
  ModelSpec s;
  s.name = "linear";
  s.params["M"] = Param::matrix(Matrix{{-2.0, 1.0}, {-1.0, -2.0}});
  s.params["B"] = Param::vector({0.0, 1.0});
  s.inputs = linspace_inputs(Vector::Constant(1, -0.5), Vector::Constant(1, 0.5), {3});
  s.tau = 0.1;
  s.w = Vector::Constant(2, 0.05);
  s.z = Vector::Zero(2);
  return lookup(s);
}

void BM_expm(benchmark::State& state) {
  Rng rng(1);
  const Matrix l = random_metzler(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(expm(l, 0.1));
}
BENCHMARK(BM_expm)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_predict_family(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::vector<PredictorTerm> terms;
  for (int k = 0; k < 5; ++k)
    terms.push_back(to_predictor_term(make_growth_bound(random_metzler(rng, n), Vector::Constant(n, 0.01), 0.01),
                                      Vector::Constant(n, 0.001)));
  const GridParameter eta(Vector::Constant(n, 0.05));
  for (auto _ : state) benchmark::DoNotOptimize(predict_family(terms, eta));
}
BENCHMARK(BM_predict_family)->Arg(2)->Arg(4)->Arg(8);

void BM_minimize(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::vector<PredictorTerm> terms;
  for (int k = 0; k < 5; ++k)
    terms.push_back(to_predictor_term(make_growth_bound(random_metzler(rng, n), Vector::Constant(n, 0.01), 0.1),
                                      Vector::Constant(n, 0.001)));
  const Objective obj(terms);
  const auto box = BoxBounds::unbounded(static_cast<std::size_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(obj, -3.0 * static_cast<double>(n), box));
}
BENCHMARK(BM_minimize)->Arg(2)->Arg(4)->Arg(8);

void BM_build_validation(benchmark::State& state) {
  const Plant plant = validation_plant();
  const auto m = state.range(0);
  const auto grid = UniformGrid::from_subdivisions(Vector::Constant(2, -1), Vector::Constant(2, 1), {m, m}, {false, false});
  BuildOptions opt;
  opt.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build(grid, plant, Vector::Zero(2), opt));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(grid.size()) * 3);
}
BENCHMARK(BM_build_validation)->Args({64, 1})->Args({128, 1})->Args({128, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_mc_expected_cells(benchmark::State& state) {
  const GridParameter eta(Vector{{0.3, 0.7, 1.1}});
  const Vector r{{0.8, 0.9, 2.5}};
  for (auto _ : state) benchmark::DoNotOptimize(mc_expected_cells(eta, r, static_cast<std::uint64_t>(state.range(0)), 7));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_mc_expected_cells)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
