#include <doctest.h>

#include <cmath>
#include <vector>

#include "osr/baselines.hpp"
#include "osr/error.hpp"

using namespace osr::baselines;
using osr::StreamRng;
using osr::dist::Distribution;

TEST_CASE("ucb1 prefers the rarely pulled arm") {
  ArmStats stats(2);
  for (int i = 0; i < 100; ++i) stats.record(0, 1.0);
  stats.record(1, 0.5);
  const double index1 = 1.0 + std::sqrt(2.0 * std::log(100.0) / 100.0);
  const double index2 = 0.5 + std::sqrt(2.0 * std::log(100.0));
  CHECK(index1 == doctest::Approx(1.30).epsilon(0.01));
  CHECK(index2 == doctest::Approx(3.53).epsilon(0.01));
  CHECK(ucb1_select(stats, 100.0) == 1);
}

TEST_CASE("ucb1 ties go to the lowest index") {
  ArmStats stats(3);
  for (std::size_t j = 0; j < 3; ++j) stats.record(j, 0.4);
  CHECK(ucb1_select(stats, 3.0) == 0);
}

TEST_CASE("ucb1 settles on the best mean once bonuses vanish") {
  ArmStats stats(3);
  const double means[] = {0.2, 0.6, 0.5};
  for (std::size_t j = 0; j < 3; ++j) {
    for (int i = 0; i < 1000000; ++i) stats.record(j, means[j]);
  }
  CHECK(ucb1_select(stats, 3e6) == 1);
}

TEST_CASE("unpulled arms are an error") {
  ArmStats stats(2);
  stats.record(0, 1.0);
  CHECK_THROWS_AS(ucb1_select(stats, 2.0), osr::UninitializedArm);
  CHECK_THROWS_AS(stats.mean(1), osr::UninitializedArm);
  CHECK_THROWS_AS(stats.record(5, 1.0), osr::InvalidArgument);
}

TEST_CASE("best single channel by mean") {
  CHECK(best_single(std::vector<double>{0.3, 0.5, 0.4}) == 1);
  CHECK(best_single(std::vector<double>{0.2, 0.2, 0.2}) == 0);
  StreamRng rng(31);
  std::vector<osr::mc::Channel> chans;
  std::vector<double> rates;
  for (int j = 0; j < 5; ++j) {
    rates.push_back(1.0 / (0.5 * (1.0 - rng.uniform01())));
    chans.push_back({Distribution::exponential(rates.back()), 0.05});
  }
  std::size_t expect = 0;
  for (std::size_t j = 1; j < rates.size(); ++j) {
    if (rates[j] < rates[expect]) expect = j;
  }
  CHECK(best_single(chans) == expect);
}

TEST_CASE("random selection is uniform and reproducible") {
  StreamRng single(1);
  CHECK(random_select(1, single) == 0);
  CHECK_THROWS_AS(random_select(0, single), osr::InvalidArgument);

  const std::size_t n = 5;
  const int draws = 100000;
  StreamRng rng(2024);
  std::vector<int> counts(n, 0);
  for (int i = 0; i < draws; ++i) ++counts[random_select(n, rng)];
  const double expected = double(draws) / double(n);
  const double sigma = std::sqrt(draws * (1.0 / n) * (1.0 - 1.0 / n));
  double chi2 = 0.0;
  for (int c : counts) {
    CHECK(std::abs(c - expected) <= 3.0 * sigma);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2 < 18.47);  // 0.999 quantile, 4 degrees of freedom

  StreamRng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(random_select(7, a) == random_select(7, b));
}
