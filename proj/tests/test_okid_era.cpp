#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sprid/error.hpp"
#include "sprid/okid_era.hpp"

using namespace sprid;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::MatrixXd random_input(std::size_t l, std::uint64_t seed) {
  const auto u = gaussian_sequence(l, 1.0, seed);
  return Eigen::Map<const Eigen::RowVectorXd>(u.data(), static_cast<Eigen::Index>(l));
}

StateSpaceModel two_state(double re, double im) {
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2);
  a << re, im, -im, re;
  b << 1.0, 0.5;
  c << 0.8, -0.3;
  return StateSpaceModel(a, b, c, scalar(0.4));
}

/// Stable 3-state model used for the noisy identification check.
StateSpaceModel three_state() {
  Eigen::MatrixXd a(3, 3), b(3, 1), c(1, 3);
  a << 0.8, 0.0, 0.0, 0.0, 0.5, 0.4, 0.0, -0.4, 0.5;
  b << 1.0, 0.7, -0.6;
  c << 0.9, 0.8, 0.6;
  return StateSpaceModel(a, b, c, scalar(0.3));
}

}  // namespace

TEST_CASE("build_regression with constant signals") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, 4);
  const Regression reg = build_regression(ones, ones, 2);
  CHECK(reg.v.rows() == 5);
  CHECK(reg.v.cols() == 2);
  CHECK(reg.y.cols() == 2);
  CHECK((reg.v.array() == 1.0).all());
}

TEST_CASE("build_regression dimensions and column layout") {
  const Eigen::MatrixXd u = random_input(100, 1);
  const Eigen::MatrixXd y = random_input(100, 2);
  const Regression reg = build_regression(u, y, 10);
  CHECK(reg.y.rows() == 1);
  CHECK(reg.y.cols() == 90);
  CHECK(reg.v.rows() == 21);
  CHECK(reg.v.cols() == 90);
  // column j holds time k = j + p: [u(k); u(k-1); y(k-1); ...]
  const int j = 17, k = j + 10;
  CHECK(reg.y(0, j) == y(0, k));
  CHECK(reg.v(0, j) == u(0, k));
  CHECK(reg.v(1, j) == u(0, k - 1));
  CHECK(reg.v(2, j) == y(0, k - 1));
  CHECK(reg.v(19, j) == u(0, k - 10));
  CHECK(reg.v(20, j) == y(0, k - 10));
  CHECK_THROWS_AS(build_regression(u.leftCols(10), y.leftCols(10), 10), ConfigError);
  CHECK_THROWS_AS(build_regression(u, y.leftCols(50), 10), ConfigError);
}

TEST_CASE("true observer parameters reproduce the regression for fast-decaying systems") {
  // With K = 0 the observer form is F = A, L = [B 0]; the neglected C A^p x term is ~0.36^20.
  const StateSpaceModel ss = two_state(0.3, 0.2);
  const int p = 20;
  const Eigen::MatrixXd u = random_input(300, 3);
  const Eigen::MatrixXd y = simulate(ss, u);
  const Regression reg = build_regression(u, y, p);
  const auto m = oracle::markov_by_powers(ss.a(), ss.b(), ss.c(), ss.d(), p + 1);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(1, 1 + 2 * p);
  phi(0, 0) = m[0](0, 0);
  for (int k = 1; k <= p; ++k) phi(0, 2 * k - 1) = m[k](0, 0);
  const Eigen::MatrixXd residual = reg.y - phi * reg.v;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("estimate_markov is exact least squares") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const int p = 4;
  Eigen::MatrixXd phi(1, 1 + 2 * p), v(1 + 2 * p, 60);
  for (Eigen::Index i = 0; i < phi.size(); ++i) phi(i) = n(rng);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng);
  const ObserverMarkov est = estimate_markov(phi * v, v, 1);
  CHECK_FALSE(est.rank_deficient);
  CHECK(est.window() == p);
  CHECK(std::abs(est.d_block(0, 0) - phi(0, 0)) < 1e-10);
  for (int k = 0; k < p; ++k) {
    CHECK(std::abs(est.cfl_blocks[k](0, 0) - phi(0, 1 + 2 * k)) < 1e-10);
    CHECK(std::abs(est.cfl_blocks[k](0, 1) - phi(0, 2 + 2 * k)) < 1e-10);
  }

  const Eigen::MatrixXd y = Eigen::MatrixXd::Random(1, 1 + 2 * p);
  const ObserverMarkov id = estimate_markov(y, Eigen::MatrixXd::Identity(1 + 2 * p, 1 + 2 * p), 1);
  CHECK(std::abs(id.d_block(0, 0) - y(0, 0)) < 1e-14);
  CHECK(std::abs(id.cfl_blocks.back()(0, 1) - y(0, 2 * p)) < 1e-14);
}

TEST_CASE("estimate_markov residual is first-order optimal") {
  const Eigen::MatrixXd u = random_input(200, 8);
  Eigen::MatrixXd y = simulate(two_state(0.6, 0.3), u);
  y += 0.05 * random_input(200, 9);
  const Regression reg = build_regression(u, y, 6);
  const ObserverMarkov est = estimate_markov(reg.y, reg.v, 1);
  Eigen::MatrixXd phi(1, reg.v.rows());
  phi(0, 0) = est.d_block(0, 0);
  for (int k = 0; k < 6; ++k) phi.block(0, 1 + 2 * k, 1, 2) = est.cfl_blocks[k];
  const double base = (reg.y - phi * reg.v).norm();
  CHECK(std::abs(base - est.residual_norm) < 1e-9 * (1.0 + base));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd dir(1, phi.cols());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = n(rng);
    CHECK((reg.y - (phi + 1e-4 * dir) * reg.v).norm() >= base - 1e-12);
  }
}

TEST_CASE("system Markov parameters recovered from noise-free data") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_siso(rng, 2);
    const Eigen::MatrixXd u = random_input(600, 100 + trial);
    const Eigen::MatrixXd y = simulate(sys.model, u);
    const Regression reg = build_regression(u, y, 20);
    const ObserverMarkov est = estimate_markov(reg.y, reg.v, 1);
    const auto io = system_markov(est, 15);
    const auto truth = ss_to_markov(sys.model, 15);
    for (int k = 0; k < 15; ++k) CHECK(std::abs(io[k](0, 0) - truth[k](0, 0)) < 1e-6);
  }
}

TEST_CASE("build_hankels structure") {
  std::vector<Eigen::MatrixXd> blocks;
  for (int k = 0; k < 4; ++k) blocks.push_back(scalar(10.0 + k));
  const HankelPair h = build_hankels(blocks, 2, 2);
  Eigen::MatrixXd h0(2, 2), h1(2, 2);
  h0 << 10, 11, 11, 12;
  h1 << 11, 12, 12, 13;
  CHECK(h.h0 == h0);
  CHECK(h.h1 == h1);

  const HankelPair one = build_hankels(blocks, 1, 1);
  CHECK(one.h0 == scalar(10));
  CHECK(one.h1 == scalar(11));
  CHECK_THROWS_AS(build_hankels(blocks, 2, 3), ConfigError);

  const std::vector<Eigen::MatrixXd> geo{scalar(1), scalar(0.5), scalar(0.25), scalar(0.125)};
  const HankelPair g = build_hankels(geo, 2, 2);
  CHECK(g.h0(0, 1) == 0.5);
  CHECK(g.h0(1, 1) == 0.25);
  CHECK(std::abs(g.h0.determinant()) < 1e-15);
}

TEST_CASE("build_hankels shift property on matrix blocks") {
  std::vector<Eigen::MatrixXd> blocks;
  for (int k = 0; k < 9; ++k) blocks.push_back(Eigen::MatrixXd::Random(2, 3));
  const HankelPair h = build_hankels(blocks, 4, 4);
  CHECK(h.h0.rows() == 8);
  CHECK(h.h0.cols() == 12);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(h.h0.block(2 * i, 3 * j, 2, 3) == blocks[i + j]);
      CHECK(h.h1.block(2 * i, 3 * j, 2, 3) == blocks[i + j + 1]);
      if (i + 1 < 4) CHECK(h.h1.block(2 * i, 3 * j, 2, 3) == h.h0.block(2 * (i + 1), 3 * j, 2, 3));
    }
  }
}

TEST_CASE("era round trip on a known order-2 system") {
  Eigen::MatrixXd f(2, 2), l(2, 2), c(1, 2);
  f << 0.6, 0.3, -0.3, 0.6;
  l << 1.0, 0.2, -0.4, 0.7;
  c << 0.5, 1.2;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::MatrixXd fk = Eigen::MatrixXd::Identity(2, 2);
  for (int k = 0; k < 21; ++k) {
    blocks.push_back(c * fk * l);
    fk = fk * f;
  }
  const EraRealization real = era(build_hankels(blocks, 10, 10), OrderRule::relative(1e-6), 1, 2);
  CHECK(real.retained_order == 2);
  for (Eigen::Index i = 1; i < real.singular_values.size(); ++i) {
    CHECK(real.singular_values(i) <= real.singular_values(i - 1));
  }
  const Eigen::VectorXcd ev = f.eigenvalues();
  const Eigen::VectorXcd er = real.f.eigenvalues();
  CHECK(oracle::pole_distance({ev(0), ev(1)}, {er(0), er(1)}) < 1e-6);
  Eigen::MatrixXd rk = Eigen::MatrixXd::Identity(2, 2);
  for (int k = 0; k < 20; ++k) {
    CHECK((real.c * rk * real.l - blocks[k]).cwiseAbs().maxCoeff() < 1e-9);
    rk = rk * real.f;
  }
  CHECK(real.h(1).cols() == 1);
  CHECK(real.g(1).cols() == 1);
}

TEST_CASE("era on rank-1 and degenerate Hankels") {
  const std::vector<Eigen::MatrixXd> geo{scalar(1), scalar(0.5), scalar(0.25), scalar(0.125), scalar(0.0625)};
  const EraRealization r = era(build_hankels(geo, 2, 2), OrderRule::relative(1e-6), 1, 1);
  CHECK(r.retained_order == 1);
  CHECK(r.f(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  HankelPair h{Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  const EraRealization z = era(h, OrderRule::fixed(2), 1, 1);
  CHECK(z.f.isZero());

  HankelPair zero{Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  CHECK_THROWS_AS(era(zero, OrderRule::relative(1e-6), 1, 1), NumericalError);
  CHECK_THROWS_AS(OrderRule::relative(1.5), ConfigError);
  CHECK_THROWS_AS(OrderRule::fixed(0), ConfigError);
}

TEST_CASE("recover_system arithmetic") {
  EraRealization r;
  r.f = scalar(0.3);
  r.c = scalar(1.0);
  r.l = Eigen::MatrixXd(1, 2);
  r.l << 0.5, 0.2;
  const RecoveredSystem rec = recover_system(r, scalar(1.0), 1.0);
  CHECK(rec.model.a()(0, 0) == doctest::Approx(0.5));
  CHECK(rec.model.b()(0, 0) == doctest::Approx(0.7));
  CHECK(rec.model.gain()->coeff(0, 0) == 0.2);
  CHECK(rec.observer_schur);

  r.l << 0.5, 0.0;
  const RecoveredSystem plain = recover_system(r, scalar(1.0), 1.0);
  CHECK(plain.model.a() == r.f);
  CHECK(plain.model.b()(0, 0) == 0.5);
}

TEST_CASE("okid_era on a lightly damped second-order plant") {
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2);
  a << -0.4, -0.5, 1.0, 0.0;
  b << 1.0, 0.0;
  c << -0.2, -0.2;  // numerator q^2 + 0.2q + 0.3 minus the feedthrough
  const StateSpaceModel plant(a, b, c, scalar(1.0));
  const Eigen::MatrixXd u = random_input(1000, 12);
  const OkidResult res = okid_era(u, simulate(plant, u), OkidConfig{}, 1.0);
  CHECK(res.retained_order == 2);
  CHECK(oracle::pole_distance(res.poles, ss_poles(plant)) < 1e-4);
}

TEST_CASE("okid_era noise-free random 3-state systems") {
  std::mt19937_64 rng(33);
  OkidConfig cfg;
  cfg.p_window = 30;
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = oracle::random_siso(rng, 3);
    const auto u = gaussian_sequence(2000, 1.0, 500 + trial);
    const auto y = simulate(sys.model, u);
    const OkidResult res = okid_era(u, y, cfg, 1.0);
    CHECK(res.retained_order == 3);
    CHECK(oracle::sorted_pole_distance(res.poles, sys.poles) < 1e-3);
    for (Eigen::Index i = 1; i < res.singular_values.size(); ++i) {
      CHECK(res.singular_values(i) <= res.singular_values(i - 1));
    }
  }
}

TEST_CASE("okid_era with 40 dB measurement noise") {
  const StateSpaceModel ss = three_state();
  const std::size_t l = 4000;
  const Eigen::MatrixXd u = random_input(l, 77);
  const Eigen::MatrixXd clean = simulate(ss, u);
  const double sigma = 0.01 * std::sqrt(clean.squaredNorm() / static_cast<double>(l));
  SimulationNoise noise;
  const auto w = gaussian_sequence(l, sigma, 78);
  noise.measurement = Eigen::Map<const Eigen::RowVectorXd>(w.data(), static_cast<Eigen::Index>(l));
  const Eigen::MatrixXd y = simulate(ss, u, noise);

  OkidConfig cfg;
  cfg.p_window = 30;
  cfg.order_rule = OrderRule::fixed(3);
  for (auto route : {RealizationRoute::kSystemMarkov, RealizationRoute::kObserverMarkov}) {
    cfg.route = route;
    const OkidResult res = okid_era(u, y, cfg, 1.0);
    CHECK(oracle::sorted_pole_distance(res.poles, ss_poles(ss)) < 5e-2);
    CHECK_FALSE(res.rank_deficient);
  }
}

TEST_CASE("okid_era is invariant to a state similarity transform") {
  const StateSpaceModel ss = three_state();
  Eigen::MatrixXd t(3, 3);
  t << 1.0, 0.4, -0.2, 0.3, 2.0, 0.1, -0.5, 0.2, 0.7;
  const Eigen::MatrixXd ti = t.inverse();
  const StateSpaceModel sim(ti * ss.a() * t, ti * ss.b(), ss.c() * t, ss.d());
  const auto u = gaussian_sequence(1500, 1.0, 4);
  OkidConfig cfg;
  cfg.p_window = 30;
  const OkidResult a = okid_era(u, simulate(ss, u), cfg, 1.0);
  const OkidResult b = okid_era(u, simulate(sim, u), cfg, 1.0);
  CHECK(oracle::sorted_pole_distance(a.poles, b.poles) < 1e-6);
}

TEST_CASE("okid_era with zero output reports retained order 0 as an error") {
  const auto u = gaussian_sequence(300, 1.0, 1);
  const std::vector<double> y(300, 0.0);
  CHECK_THROWS_AS(okid_era(u, y, OkidConfig{}, 1.0), NumericalError);
}

TEST_CASE("OkidConfig defaults") {
  CHECK(OkidConfig::default_window(2) == 20);
  CHECK(OkidConfig::default_window(6) == 30);
  OkidConfig cfg;
  cfg.p_window = 10;
  cfg.hankel_rows = 8;
  cfg.hankel_cols = 8;
  const auto u = gaussian_sequence(200, 1.0, 1);
  CHECK_THROWS_AS(okid_era(u, u, cfg, 1.0), ConfigError);
}
