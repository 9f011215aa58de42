#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "osr/error.hpp"
#include "osr/mu.hpp"

using osr::StreamRng;
using osr::dist::Distribution;
using namespace osr::mu;

TEST_CASE("success probability") {
  CHECK(success_probability(std::vector<double>{1.0}) == 1.0);
  CHECK(success_probability(std::vector<double>{0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(success_probability(std::vector<double>{0.3, 0.4}) == doctest::Approx(0.46).epsilon(1e-14));
  CHECK(success_probability(std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("threshold of Exp(1) with zeta=1, ps=0.5, K=10") {
  const auto d = Distribution::exponential(1.0);
  const double x = solve_threshold(d, 1.0, 0.5, 10.0);
  const double ref = oracle::bisect_root([](double u) { return 5.0 * std::exp(-u) - u; }, 0.0, 10.0);
  CHECK(std::abs(x - ref) < 1e-6);
  CHECK(std::abs(x - 1.3267) < 1e-4);
  CHECK(std::abs(d.above(x) - x * 1.0 / (0.5 * 10.0)) <= 1e-9);
}

TEST_CASE("threshold of a point mass") {
  const double c = 0.8, zeta = 2.0, ps = 0.3, K = 7.0;
  const double x = solve_threshold(Distribution::discrete({c}, {1.0}), zeta, ps, K);
  const double closed = c * ps * K / (ps * K + zeta);
  const double ref = oracle::bisect_root([&](double u) { return std::max(c - u, 0.0) - u * zeta / (ps * K); }, 0.0, c);
  CHECK(std::abs(x - closed) < 1e-12);
  CHECK(std::abs(ref - closed) < 1e-12);
}

TEST_CASE("threshold approaches the support bound as contention becomes free") {
  const auto point = Distribution::discrete({1.0}, {1.0});
  CHECK(solve_threshold(point, 1e-12, 0.5, 10.0) > 1.0 - 1e-9);
  const auto e = Distribution::exponential(1.0);
  double prev = 0.0;
  for (double zeta : {1.0, 1e-2, 1e-4, 1e-6, 1e-9}) {
    const double x = solve_threshold(e, zeta, 0.5, 10.0);
    CHECK(x > prev);
    prev = x;
  }
  CHECK(prev > 0.9 * e.sup_value());
}

TEST_CASE("rate of return") {
  const auto d = Distribution::exponential(1.0);
  CHECK(rate_of_return(d, 0.0, 1.0, 0.5, 10.0) == doctest::Approx(1.0 * 10.0 / (2.0 + 10.0)).epsilon(1e-14));
  const double x = solve_threshold(d, 1.0, 0.5, 10.0);
  const double r = rate_of_return(d, x, 1.0, 0.5, 10.0);
  CHECK(std::abs(r - (1 + x) * 10.0 / (2 * std::exp(x) + 10)) < 1e-12);
  CHECK(std::abs(r - x) < 1e-6);
  for (int i = 0; i < 100; ++i) {
    const double u = 0.05 * i;
    CHECK(r >= rate_of_return(d, u, 1.0, 0.5, 10.0) - 1e-9);
  }
  CHECK_THROWS_AS(rate_of_return(Distribution::discrete({1.0}, {1.0}), 1.5, 1.0, 0.5, 10.0), osr::ZeroTail);
}

TEST_CASE("fixed point and monotonicity over a parameter grid") {
  for (double rate : {0.5, 1.0, 3.0}) {
    const auto d = Distribution::exponential(rate);
    for (double ps : {0.1, 0.4, 0.9}) {
      double prev_k = 0.0;
      for (double K : {1.0, 5.0, 20.0}) {
        const double x = solve_threshold(d, 1.0, ps, K);
        CHECK(std::abs(rate_of_return(d, x, 1.0, ps, K) - x) < 1e-6);
        CHECK(x >= prev_k);
        prev_k = x;
      }
    }
    double prev_ps = 0.0;
    for (double ps : {0.1, 0.3, 0.6, 1.0}) {
      const double x = solve_threshold(d, 1.0, ps, 10.0);
      CHECK(x >= prev_ps);
      prev_ps = x;
    }
    double prev_z = INFINITY;
    for (double zeta : {0.1, 0.5, 1.0, 4.0}) {
      const double x = solve_threshold(d, zeta, 0.5, 10.0);
      CHECK(x <= prev_z);
      prev_z = x;
    }
  }
}

TEST_CASE("episode simulation") {
  MuConfig cfg;
  cfg.attempt_probs = {0.3, 0.4};
  cfg.zeta = 1.0;
  cfg.K = 10.0;
  cfg.channel = Distribution::exponential(1.0);
  cfg.validate();

  StreamRng rng(osr::stream_key(1, {2}));
  for (int i = 0; i < 100; ++i) {
    const auto rec = simulate_mu_episode(cfg, 0.0, rng);
    CHECK(rec.stopping_index == 1);
    CHECK(rec.total_time >= rec.stopping_index * cfg.zeta + cfg.K);
    CHECK(rec.reward >= 0.0);
  }

  MuConfig point = cfg;
  point.channel = Distribution::discrete({1.0}, {1.0});
  const auto rec = simulate_mu_episode(point, 0.5, rng);
  CHECK(rec.stopping_index == 1);
  CHECK(rec.reward == 10.0);

  // E[tau] = 1 / P(X >= ln 2) = 2.
  const int n = 100'000;
  double sum_tau = 0.0;
  for (int i = 0; i < n; ++i) sum_tau += simulate_mu_episode(cfg, std::log(2.0), rng).stopping_index;
  const double sigma = std::sqrt(2.0 / n);  // sd of a geometric(1/2) mean
  CHECK(std::abs(sum_tau / n - 2.0) <= 3 * sigma);

  MuConfig capped = point;
  capped.contention_cap = 50;
  CHECK_THROWS_AS(simulate_mu_episode(capped, 2.0, rng), osr::EpisodeTooLong);
}

TEST_CASE("simulated long-run rate matches the renewal quotient") {
  MuConfig cfg;
  cfg.attempt_probs = {0.2, 0.35, 0.1};
  cfg.channel = Distribution::exponential(1.0);
  const double ps = success_probability(cfg.attempt_probs);
  const double x = solve_threshold(cfg.channel, cfg.zeta, ps, cfg.K);
  StreamRng rng(osr::stream_key(9, {}));
  double reward = 0.0, time = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const auto rec = simulate_mu_episode(cfg, x, rng);
    reward += rec.reward;
    time += rec.total_time;
  }
  const double analytic = rate_of_return(cfg.channel, x, cfg.zeta, ps, cfg.K);
  CHECK(std::abs(reward / time - analytic) <= 0.01 * analytic);
}

TEST_CASE("contention winners and durations") {
  MuConfig cfg;
  cfg.attempt_probs = {0.1, 0.3, 0.45};
  cfg.zeta = 2.0;
  const auto w = winner_distribution(cfg.attempt_probs);
  const double ps = success_probability(cfg.attempt_probs);
  ContentionStream stream(cfg, 77);
  const int n = 100'000;
  std::vector<int> wins(3, 0);
  double eta = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& c = stream.at(k);
    wins[c.winner]++;
    eta += c.eta;
  }
  for (int i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(w[i] * (1 - w[i]) / n);
    CHECK(std::abs(wins[i] / double(n) - w[i]) <= 4 * sigma);
  }
  // Mean contention time zeta / ps; geometric sd sqrt(1-ps)/ps slots.
  const double sd = cfg.zeta * std::sqrt(1 - ps) / ps / std::sqrt(double(n));
  CHECK(std::abs(eta / n - cfg.zeta / ps) <= 4 * sd);

  ContentionStream replay(cfg, 77);
  CHECK(replay.at(5).quality == stream.at(5).quality);
  CHECK(replay.at(5).winner == stream.at(5).winner);
}

TEST_CASE("configuration validation") {
  MuConfig cfg;
  cfg.attempt_probs = {};
  CHECK_THROWS_AS(cfg.validate(), osr::InvalidArgument);
  cfg.attempt_probs = {1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), osr::InvalidArgument);
  cfg.attempt_probs = {1.2};
  CHECK_THROWS_AS(cfg.validate(), osr::InvalidArgument);
  cfg.attempt_probs = {0.5};
  cfg.zeta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), osr::InvalidArgument);
}
