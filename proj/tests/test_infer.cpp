#include <mgp/infer.hpp>
#include <mgp/rng.hpp>

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace mgp;

namespace {

Episode small_episode(rng& gen, Eigen::Index n, Eigen::Index m) {
  Episode ep;
  ep.id = "e";
  ep.channels.resize(static_cast<size_t>(m));
  for (Eigen::Index c = 0; c < m; ++c)
    ep.channels[static_cast<size_t>(c)] = "ch" + std::to_string(c + 1);
  ep.times = random_times(gen, n);
  ep.obs = random_matrix(gen, n, m);
  ep.mask = Mask::Constant(n, m, true);
  return ep;
}

// one univariate draw from a stationary model with known hyperparameters
Episode smgp_draw(rng& gen, Eigen::Index n, double len, double noise) {
  Episode ep;
  ep.id = "draw";
  ep.channels = {"y"};
  ep.times = random_times(gen, n);
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = rbf(ep.times(i), ep.times(j), 1.0, len);
  k.diagonal().array() += noise;
  CholFactor f = cholesky(SymMatrix(std::move(k)));
  Vector z = random_vector(gen, n);
  ep.obs = (f.lower * z).reshaped(n, 1);
  ep.mask = Mask::Constant(n, 1, true);
  return ep;
}

}  // namespace

TEST_CASE("hmc on a standard normal recovers its moments") {
  const Eigen::Index d = 5;
  auto logp = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  auto grad = [](const Vector& x) -> Vector { return -x; };

  HmcConfig cfg;
  cfg.step_size = 0.4;
  cfg.n_leapfrog = 4;
  cfg.n_samples = 5000;
  cfg.n_burnin = 500;
  cfg.seed = 2;
  std::vector<HmcDraw> draws = hmc_run(logp, grad, Vector::Zero(d), cfg);
  REQUIRE(draws.size() == 5000);

  Vector mean = Vector::Zero(d);
  for (const auto& dr : draws) mean += dr.theta;
  mean /= 5000.0;
  Vector var = Vector::Zero(d);
  for (const auto& dr : draws) var += (dr.theta - mean).array().square().matrix();
  var /= 4999.0;

  const double mean_tol = 3.0 / std::sqrt(5000.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    CHECK(std::abs(mean(i)) <= mean_tol);
    CHECK(var(i) >= 0.8);
    CHECK(var(i) <= 1.2);
  }

  int accepted = 0;
  for (const auto& dr : draws) accepted += dr.accepted ? 1 : 0;
  CHECK(accepted >= 2500);  // well-tuned step on a gaussian accepts most moves
}

TEST_CASE("a vanishing step size accepts essentially every proposal") {
  Matrix prec(2, 2);
  prec << 5.0, -4.5, -4.5, 5.0;  // a strongly correlated gaussian
  auto logp = [&](const Vector& x) { return -0.5 * x.dot(prec * x); };
  auto grad = [&](const Vector& x) -> Vector { return -(prec * x); };

  HmcConfig cfg;
  cfg.step_size = 1e-6;
  cfg.n_leapfrog = 1;
  cfg.n_samples = 400;
  cfg.n_burnin = 0;
  cfg.seed = 9;
  Vector init(2);
  init << 0.7, -0.3;
  std::vector<HmcDraw> draws = hmc_run(logp, grad, init, cfg);
  int accepted = 0;
  for (const auto& dr : draws) accepted += dr.accepted ? 1 : 0;
  CHECK(accepted >= 396);  // >= 99%
}

TEST_CASE("hmc is deterministic for a fixed seed") {
  auto logp = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  auto grad = [](const Vector& x) -> Vector { return -x; };
  HmcConfig cfg;
  cfg.step_size = 0.3;
  cfg.n_leapfrog = 5;
  cfg.n_samples = 50;
  cfg.n_burnin = 20;
  cfg.seed = 77;
  auto a = hmc_run(logp, grad, Vector::Ones(3), cfg);
  auto b = hmc_run(logp, grad, Vector::Ones(3), cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta == b[i].theta);  // bitwise
    CHECK(a[i].log_post == b[i].log_post);
    CHECK(a[i].accepted == b[i].accepted);
  }
}

TEST_CASE("hmc input validation") {
  auto logp = [](const Vector& x) { return -0.5 * x.squaredNorm(); };
  auto grad = [](const Vector& x) -> Vector { return -x; };
  HmcConfig cfg;
  SUBCASE("zero step") {
    cfg.step_size = 0.0;
    CHECK_THROWS_AS(hmc_run(logp, grad, Vector::Zero(2), cfg), invalid_argument);
  }
  SUBCASE("no leapfrog steps") {
    cfg.n_leapfrog = 0;
    CHECK_THROWS_AS(hmc_run(logp, grad, Vector::Zero(2), cfg), invalid_argument);
  }
  SUBCASE("no samples") {
    cfg.n_samples = 0;
    CHECK_THROWS_AS(hmc_run(logp, grad, Vector::Zero(2), cfg), invalid_argument);
  }
  SUBCASE("negative burnin") {
    cfg.n_burnin = -1;
    CHECK_THROWS_AS(hmc_run(logp, grad, Vector::Zero(2), cfg), invalid_argument);
  }
  SUBCASE("non-finite density at init") {
    auto bad = [](const Vector&) { return std::numeric_limits<double>::quiet_NaN(); };
    CHECK_THROWS_AS(hmc_run(bad, grad, Vector::Zero(2), cfg), non_finite);
  }
}

TEST_CASE("map_fit with zero iterations returns the initialization unchanged") {
  rng gen(80);
  Episode ep = small_episode(gen, 8, 2);
  PriorSpec priors;
  MapConfig cfg;
  cfg.max_iters = 0;
  for (ModelKind kind : {ModelKind::smgp, ModelKind::nmgp, ModelKind::gnmgp}) {
    MapResult res = map_fit(ep, kind, priors, cfg);
    ModelParams p0 = init_params(ep, kind, priors, cfg.window_w);
    CHECK((pack(res.params) - pack(p0)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(res.iters == 0);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0] == doctest::Approx(log_posterior(p0, priors, ep)).epsilon(1e-12));
  }
}

TEST_CASE("the optimizer trace never decreases") {
  rng gen(81);
  Episode ep = small_episode(gen, 10, 2);
  PriorSpec priors;
  MapConfig cfg;
  cfg.max_iters = 60;
  for (ModelKind kind : {ModelKind::smgp, ModelKind::nmgp}) {
    MapResult res = map_fit(ep, kind, priors, cfg);
    REQUIRE(res.trace.size() >= 2);
    for (size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] >= res.trace[i - 1]);
    CHECK(res.log_post == res.trace.back());
    CHECK(res.log_post > res.trace.front());
  }
}

TEST_CASE("map_fit recovers a stationary length scale") {
  rng gen(82);
  Episode ep = smgp_draw(gen, 150, 0.15, 0.01);
  PriorSpec priors;
  MapConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.max_iters = 300;
  cfg.grad_tol = 1e-4;
  MapResult res = map_fit(ep, ModelKind::smgp, priors, cfg);
  CHECK(std::abs(res.params.log_len - std::log(0.15)) <= 0.3);
  CHECK(res.params.noise_var >= 0.002);
  CHECK(res.params.noise_var <= 0.08);
}

TEST_CASE("restarts are deterministic and can only improve the objective") {
  rng gen(83);
  Episode ep = small_episode(gen, 8, 2);
  PriorSpec priors;
  MapConfig plain;
  plain.max_iters = 40;
  MapConfig multi = plain;
  multi.restarts = 2;
  multi.seed = 7;

  MapResult base = map_fit(ep, ModelKind::smgp, priors, plain);
  MapResult a = map_fit(ep, ModelKind::smgp, priors, multi);
  MapResult b = map_fit(ep, ModelKind::smgp, priors, multi);
  CHECK(a.log_post >= base.log_post);
  CHECK(a.restart_index >= 0);
  CHECK(a.restart_index <= 2);
  CHECK((pack(a.params) - pack(b.params)).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a.log_post == b.log_post);
}

TEST_CASE("first restart is the exact cross-polarity mirror of the start") {
  rng gen(85);
  Episode ep = small_episode(gen, 9, 2);
  PriorSpec priors;
  MapConfig cfg;
  cfg.max_iters = 0;  // no ascent: the result is the best of the bare starts
  cfg.restarts = 1;
  cfg.window_w = 0.1;

  // oracle: evaluate the windowed init and its mirrored polarity directly
  ModelParams p0 = init_params(ep, ModelKind::nmgp, priors, 0.1);
  Vector th = pack(p0);
  double lp0 = log_posterior(unpack(th, p0), priors, ep);
  th(2) = -th(2);  // layout: [0] log noise, coreg entries (0,0),(1,0),(1,1)
  double lp1 = log_posterior(unpack(th, p0), priors, ep);

  MapResult res = map_fit(ep, ModelKind::nmgp, priors, cfg);
  CHECK(res.log_post == doctest::Approx(std::max(lp0, lp1)).epsilon(1e-12));
  CHECK(res.restart_index == (lp1 > lp0 ? 1 : 0));
}

TEST_CASE("map_fit input validation") {
  rng gen(84);
  Episode ep = small_episode(gen, 6, 2);
  PriorSpec priors;
  MapConfig cfg;
  SUBCASE("learning rate") {
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(map_fit(ep, ModelKind::smgp, priors, cfg), invalid_argument);
  }
  SUBCASE("max_iters") {
    cfg.max_iters = -1;
    CHECK_THROWS_AS(map_fit(ep, ModelKind::smgp, priors, cfg), invalid_argument);
  }
  SUBCASE("restarts") {
    cfg.restarts = -1;
    CHECK_THROWS_AS(map_fit(ep, ModelKind::smgp, priors, cfg), invalid_argument);
  }
}

TEST_CASE("init_params builds a valid, data-driven start") {
  rng gen(85);
  const Eigen::Index n = 12, m = 2;
  Episode ep = small_episode(gen, n, m);
  PriorSpec priors;

  // the documented noise floor: 5% of the mean per-channel sample variance
  double var_sum = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    double s = 0.0, s2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s += ep.obs(i, c);
      s2 += ep.obs(i, c) * ep.obs(i, c);
    }
    var_sum += (s2 - s * s / static_cast<double>(n)) / static_cast<double>(n - 1);
  }
  const double want_noise = 0.05 * var_sum / static_cast<double>(m);

  SUBCASE("smgp") {
    ModelParams p = init_params(ep, ModelKind::smgp, priors, -1.0);
    CHECK_NOTHROW(p.validate(n));
    CHECK(p.noise_var == doctest::Approx(want_noise).epsilon(1e-12));
    CHECK(p.log_amp == 0.0);
    CHECK(p.log_len == doctest::Approx(init_loglen_semivariogram(ep)(0)).epsilon(1e-12));
  }
  SUBCASE("nmgp") {
    ModelParams p = init_params(ep, ModelKind::nmgp, priors, -1.0);
    CHECK_NOTHROW(p.validate(n));
    REQUIRE(p.logsd.has_value());
    CHECK(p.logsd->values.isZero(0.0));
    CHECK(p.loglen->values.size() == n);
  }
  SUBCASE("gnmgp") {
    ModelParams p = init_params(ep, ModelKind::gnmgp, priors, -1.0);
    CHECK_NOTHROW(p.validate(n));
    REQUIRE(p.coreg_procs.size() == 3);
    CHECK(p.coreg_procs[0].coreg_i == 0);
    CHECK(p.coreg_procs[1].coreg_i == 1);
    CHECK(p.coreg_procs[1].coreg_j == 0);
    CHECK(p.coreg_procs[2].coreg_i == 1);
    CHECK(p.coreg_procs[2].coreg_j == 1);
  }
  SUBCASE("too few points") {
    Episode tiny = small_episode(gen, 3, 2);
    CHECK_THROWS_AS(init_params(tiny, ModelKind::smgp, priors, -1.0), degenerate_data);
  }
}

TEST_CASE("hmc_sample is a deterministic chain over valid parameters") {
  rng gen(86);
  Episode ep = small_episode(gen, 6, 2);
  PriorSpec priors;
  ModelParams init = init_params(ep, ModelKind::nmgp, priors, -1.0);
  HmcConfig cfg;
  cfg.step_size = 0.005;
  cfg.n_leapfrog = 8;
  cfg.n_samples = 15;
  cfg.n_burnin = 5;
  cfg.seed = 3;

  auto a = hmc_sample(ep, ModelKind::nmgp, priors, cfg, init);
  REQUIRE(a.size() == 15);
  for (const auto& s : a) {
    CHECK_NOTHROW(s.params.validate(6));
    CHECK(std::isfinite(s.log_post));
  }
  CHECK(a.back().log_post ==
        doctest::Approx(log_posterior(a.back().params, priors, ep, DensityMode::hmc))
            .epsilon(1e-10));

  auto b = hmc_sample(ep, ModelKind::nmgp, priors, cfg, init);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK((pack(a[i].params) - pack(b[i].params)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(a[i].accepted == b[i].accepted);
  }
}

TEST_CASE("derived correlation and sd curves") {
  const Eigen::Index n = 9;
  Vector times(n);
  for (Eigen::Index i = 0; i < n; ++i) times(i) = static_cast<double>(i) / 8.0;
  PriorSpec priors;

  SUBCASE("nonseparable: constant entry processes reproduce the canonical factorization") {
    const double s1 = 1.3, s2 = 0.7, r = 0.44;
    ModelParams p;
    p.kind = ModelKind::gnmgp;
    p.noise_var = 0.1;
    p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0,
                             Vector::Constant(n, std::log(0.3)), priors.loglen_prior};
    auto push = [&](int a, int b, double v) {
      p.coreg_procs.push_back(LatentProcess{LatentKind::coreg_entry, a, b,
                                            Vector::Constant(n, v), priors.coreg_prior});
    };
    push(0, 0, s1);
    push(1, 0, s2 * r);
    push(1, 1, s2 * std::sqrt(1.0 - r * r));

    auto [corr, sd] = derive_corr_sd(p, times, times(4));
    CHECK(corr(0, 0) == 1.0);
    CHECK(corr(1, 1) == 1.0);
    CHECK(corr(1, 0) == doctest::Approx(r).epsilon(1e-6));
    CHECK(corr(0, 1) == doctest::Approx(r).epsilon(1e-6));
    CHECK(sd(0) == doctest::Approx(s1).epsilon(1e-6));
    CHECK(sd(1) == doctest::Approx(s2).epsilon(1e-6));
  }

  SUBCASE("separable nonstationary at zero log sd: sd is the factor diagonal") {
    rng gen(87);
    ModelParams p;
    p.kind = ModelKind::nmgp;
    p.noise_var = 0.2;
    p.coreg_const.resize(2, 2);
    p.coreg_const << 1.1, 0.0, -0.4, 0.9;
    p.loglen = LatentProcess{LatentKind::log_length_scale, 0, 0,
                             Vector::Constant(n, std::log(0.25)), priors.loglen_prior};
    p.logsd = LatentProcess{LatentKind::log_signal_sd, 0, 0, Vector::Zero(n),
                            priors.logsd_prior};
    auto [corr, sd] = derive_corr_sd(p, times, 0.37);
    Matrix b = p.coreg_const * p.coreg_const.transpose();
    CHECK(std::abs(sd(0) - std::sqrt(b(0, 0))) <= 1e-12);
    CHECK(std::abs(sd(1) - std::sqrt(b(1, 1))) <= 1e-12);
    CHECK(corr(1, 0) == doctest::Approx(b(1, 0) / std::sqrt(b(0, 0) * b(1, 1))).epsilon(1e-12));
  }

  SUBCASE("stationary: amplitude scales the sd, never the correlation") {
    ModelParams p;
    p.kind = ModelKind::smgp;
    p.noise_var = 0.2;
    p.log_len = std::log(0.3);
    p.log_amp = 0.6;
    p.coreg_const.resize(2, 2);
    p.coreg_const << 1.0, 0.0, 0.5, 0.8;
    auto [corr, sd] = derive_corr_sd(p, times, 0.5);
    Matrix b = p.coreg_const * p.coreg_const.transpose();
    for (Eigen::Index i = 0; i < 2; ++i)
      CHECK(sd(i) == doctest::Approx(std::exp(0.6) * std::sqrt(b(i, i))).epsilon(1e-14));
    CHECK(corr(1, 0) == doctest::Approx(b(1, 0) / std::sqrt(b(0, 0) * b(1, 1))).epsilon(1e-14));
    CHECK(std::abs(corr(1, 0)) <= 1.0 + 1e-12);
  }

  SUBCASE("a silent channel is reported, not divided by") {
    ModelParams p;
    p.kind = ModelKind::smgp;
    p.noise_var = 0.2;
    p.log_len = std::log(0.3);
    p.log_amp = 0.0;
    p.coreg_const = Matrix::Zero(2, 2);
    p.coreg_const(0, 0) = 1.0;  // second row entirely zero
    CHECK_THROWS_AS(derive_corr_sd(p, times, 0.5), zero_variance);
  }
}
