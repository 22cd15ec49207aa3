#include <benchmark/benchmark.h>

#include <cmath>

#include <mgp/linalg.hpp>
#include <mgp/model.hpp>
#include <mgp/rng.hpp>
#include <mgp/synth.hpp>

using namespace mgp;

namespace {

Episode make_episode(Eigen::Index n) {
  SynthConfig cfg;
  cfg.n_points = static_cast<int>(n);
  cfg.seed = 11;
  cfg.noise_var = 0.01;
  return generate(cfg).first;
}

ModelParams separable_params() {
  ModelParams p;
  p.kind = ModelKind::smgp;
  p.noise_var = 0.01;
  p.coreg_const = Matrix{{1.0, 0.0}, {0.4, 0.8}};
  p.log_len = std::log(0.2);
  p.log_amp = 0.1;
  return p;
}

ModelParams nonseparable_params(const Episode& ep) {
  ModelParams p;
  p.kind = ModelKind::gnmgp;
  p.noise_var = 0.01;
  const Eigen::Index n = ep.n();
  p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0,
                           Vector::Constant(n, std::log(0.2)), GpPrior{}};
  p.coreg_procs = {
      LatentProcess{LatentKind::coreg_entry, 0, 0, Vector::Constant(n, 1.0), GpPrior{}},
      LatentProcess{LatentKind::coreg_entry, 1, 0, Vector::Constant(n, 0.4), GpPrior{}},
      LatentProcess{LatentKind::coreg_entry, 1, 1, Vector::Constant(n, 0.8), GpPrior{}}};
  return p;
}

// dense-route mvn loglik over a complete episode, the baseline the Kronecker
// path is measured against
double dense_loglik(const SymMatrix& b, const SymMatrix& k, double noise_var, const Vector& y) {
  const Eigen::Index m = b.dim(), n = k.dim();
  Matrix cov(m * n, m * n);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index c = 0; c < m; ++c) cov.block(a * n, c * n, n, n) = b(a, c) * k.mat();
  cov.diagonal().array() += noise_var;
  return mvn_logpdf(y, Vector::Zero(m * n), SymMatrix(std::move(cov)));
}

struct GramSet {
  SymMatrix b;
  SymMatrix k;
  Vector y;
};

GramSet fill_gram(Eigen::Index m, Eigen::Index n) {
  rng gen(3);
  Matrix l = Matrix::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) += 0.3 * gen.normal();
  Vector times(n);
  for (Eigen::Index i = 0; i < n; ++i) times(i) = static_cast<double>(i) / static_cast<double>(n);
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = std::exp(-std::pow(times(i) - times(j), 2) / (2.0 * 0.2 * 0.2));
  Vector y(m * n);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = gen.normal();
  return {SymMatrix(Matrix(l * l.transpose())), SymMatrix(std::move(k)), std::move(y)};
}

void bm_kron_loglik(benchmark::State& state) {
  GramSet g = fill_gram(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kron_fast_loglik(g.b, g.k, 0.05, g.y));
}

void bm_dense_loglik(benchmark::State& state) {
  GramSet g = fill_gram(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(dense_loglik(g.b, g.k, 0.05, g.y));
}

void bm_assemble_cov(benchmark::State& state) {
  Episode ep = make_episode(state.range(0));
  ModelParams p = nonseparable_params(ep);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_cov(p, ep.times));
}

void bm_logpost_separable(benchmark::State& state) {
  Episode ep = make_episode(state.range(0));
  ModelParams p = separable_params();
  PosteriorEval eval(ep, p.kind, PriorSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(eval.logpost(p, DensityMode::map));
}

void bm_grad_separable(benchmark::State& state) {
  Episode ep = make_episode(state.range(0));
  ModelParams p = separable_params();
  PosteriorEval eval(ep, p.kind, PriorSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(eval.grad(p, DensityMode::map));
}

void bm_grad_nonseparable(benchmark::State& state) {
  Episode ep = make_episode(state.range(0));
  ModelParams p = nonseparable_params(ep);
  PosteriorEval eval(ep, p.kind, PriorSpec{});
  for (auto _ : state) benchmark::DoNotOptimize(eval.grad(p, DensityMode::map));
}

BENCHMARK(bm_kron_loglik)->Args({3, 100})->Args({5, 400})->Args({5, 1000});
BENCHMARK(bm_dense_loglik)->Args({3, 100})->Args({5, 400});
BENCHMARK(bm_assemble_cov)->Arg(100)->Arg(300);
BENCHMARK(bm_logpost_separable)->Arg(100)->Arg(300);
BENCHMARK(bm_grad_separable)->Arg(100)->Arg(300);
BENCHMARK(bm_grad_nonseparable)->Arg(60)->Arg(150);

}  // namespace

BENCHMARK_MAIN();
