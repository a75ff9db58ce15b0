#include <jpsa/autorule.hpp>
#include <jpsa/graph.hpp>
#include <jpsa/harness.hpp>
#include <jpsa/init_embed.hpp>
#include <jpsa/superpixel.hpp>
#include <jpsa/synthetic.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace jpsa;

namespace {

Matrix random_nonneg(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m / m.colwise().norm().maxCoeff();
}

void BM_KnnHeatGraph(benchmark::State& state) {
  const Matrix x = random_nonneg(30, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(knn_heat_graph(x, 10, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnHeatGraph)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_AutoRule(benchmark::State& state) {
  const Matrix x = random_nonneg(30, state.range(0), 2);
  const SparseMatrix w = knn_heat_graph(x, 10, 1.0);
  const SparseMatrix lf = laplacian(w);
  const Matrix theta0 = lpp_fit(x, lf, degrees(w), 10).projection;
  for (auto _ : state) benchmark::DoNotOptimize(autorule_fit(x, lf, theta0, 0.1, AdmmConfig{}));
}
BENCHMARK(BM_AutoRule)->Arg(120)->Arg(240)->Arg(480)->Unit(benchmark::kMillisecond);

void BM_Slic(benchmark::State& state) {
  SyntheticSpec spec;
  spec.width = spec.height = static_cast<int>(state.range(0));
  const auto scene = generate_synthetic(spec);
  const FeatureMatrix cube(scene.cube, FeatureKind::pixel);
  SlicOptions opt;
  opt.n_segments = superpixel_count(scene.labels.size(), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(slic_segment(cube, scene.width, scene.height, opt));
}
BENCHMARK(BM_Slic)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_PipelineJpsa(benchmark::State& state) {
  const auto cfg = ExperimentConfig::from_text("preset=indian_pines\njpsa.m=" + std::to_string(state.range(0)) + "\n");
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg, false));
}
BENCHMARK(BM_PipelineJpsa)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
