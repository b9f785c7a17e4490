#include <benchmark/benchmark.h>

#include <random>

#include "sprid/gobf.hpp"
#include "sprid/okid_era.hpp"
#include "sprid/qp.hpp"
#include "sprid/spr_fit.hpp"

using namespace sprid;

namespace {

FrequencyResponse example_response(const Poly& num, std::size_t points) {
  const RationalTf tf(num, {1.0, 0.4, 0.5}, 1.0);
  const auto grid = uniform_grid(1.0, points);
  return FrequencyResponse(grid, eval_freq(tf, grid), 1.0);
}

void BM_FitSprSprPlant(benchmark::State& state) {
  const auto data = example_response({1.0, 0.2, 0.3}, static_cast<std::size_t>(state.range(0)));
  const GobfBasis basis = kautz_basis(-0.33, -0.2, 8, 1.0);
  SprFitConfig cfg;
  cfg.epsilon = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(fit_spr(data, basis, cfg));
}
BENCHMARK(BM_FitSprSprPlant)->Arg(128)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_FitSprNonSprPlant(benchmark::State& state) {
  const auto data = example_response({0.25, 0.2, 0.3}, 512);
  const GobfBasis basis = kautz_basis(-0.33, -0.2, 8, 1.0);
  SprFitConfig cfg;
  cfg.epsilon = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(fit_spr(data, basis, cfg));
}
BENCHMARK(BM_FitSprNonSprPlant)->Unit(benchmark::kMillisecond);

void BM_GramMatrix(benchmark::State& state) {
  const GobfBasis basis = kautz_basis(-0.33, -0.2, static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(basis, 4096));
}
BENCHMARK(BM_GramMatrix)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_OkidEra(benchmark::State& state) {
  Eigen::MatrixXd a(3, 3), b(3, 1), c(1, 3);
  a << 0.8, 0.0, 0.0, 0.0, 0.5, 0.4, 0.0, -0.4, 0.5;
  b << 1.0, 0.7, -0.6;
  c << 0.9, 0.8, 0.6;
  const StateSpaceModel ss(a, b, c, Eigen::MatrixXd::Constant(1, 1, 0.3));
  const auto u = gaussian_sequence(static_cast<std::size_t>(state.range(0)), 1.0, 1);
  const auto y = simulate(ss, u);
  OkidConfig cfg;
  cfg.p_window = 30;
  for (auto _ : state) benchmark::DoNotOptimize(okid_era(u, y, cfg, 1.0));
}
BENCHMARK(BM_OkidEra)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_SolveQp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = g(rng);
  QpProblem qp;
  qp.hessian = r.transpose() * r + 1e-6 * Eigen::MatrixXd::Identity(n, n);
  qp.linear = Eigen::VectorXd::NullaryExpr(n, [&] { return 3.0 * g(rng); });
  qp.ineq_matrix = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return g(rng); });
  qp.ineq_rhs = Eigen::VectorXd::NullaryExpr(m, [&] { return std::abs(g(rng)) + 0.1; });
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(qp));
}
BENCHMARK(BM_SolveQp)->Args({5, 8})->Args({9, 512})->Args({17, 2048})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
