#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "osr/error.hpp"
#include "osr/online.hpp"

using osr::StreamRng;
using osr::dist::Distribution;
using osr::dist::EmpiricalEstimator;
using namespace osr::online;

namespace {

std::vector<osr::mc::Channel> to_channels(const oracle::SmallInstance& inst) {
  std::vector<osr::mc::Channel> out;
  for (std::size_t j = 0; j < inst.laws.size(); ++j) {
    out.push_back({Distribution::discrete(inst.laws[j].v, inst.laws[j].p), inst.costs[j]});
  }
  return out;
}

}  // namespace

TEST_CASE("exploration threshold follows L t^z log t") {
  LearnerParams p;
  p.L = 10.0;
  p.z = 0.2;
  CHECK(exploration_threshold(p, 100.0) == doctest::Approx(10.0 * std::pow(100.0, 0.2) * std::log(100.0)));
  CHECK(exploration_threshold(p, 100.0) == doctest::Approx(115.7).epsilon(1e-3));
  CHECK(exploration_threshold(p, 1.0) == 0.0);
  p.log_base = LogBase::ten;
  CHECK(exploration_threshold(p, 100.0) == doctest::Approx(10.0 * std::pow(100.0, 0.2) * 2.0));
}

TEST_CASE("nothing is due at the first stage") {
  LearnerParams p;
  const std::vector<std::size_t> counts{1, 1, 1};
  CHECK(exploration_due(counts, 1.0, p).empty());
  const std::vector<std::size_t> mixed{200, 3, 116};
  CHECK(exploration_due(mixed, 100.0, p) == std::vector<std::size_t>{1});
}

TEST_CASE("tolerance schedules") {
  LearnerParams p;
  p.z = 0.2;
  CHECK(tolerance(p, 4000.0) == doctest::Approx(std::pow(4000.0, -0.1)));
  p.mode = Mode::adaptive;
  p.theta = 0.3;
  CHECK(tolerance(p, 4000.0) == doctest::Approx(std::pow(4000.0, -0.3)));
  p.fixed_tolerance = 0.0;
  CHECK(tolerance(p, 4000.0) == 0.0);
  CHECK(balanced_z(2.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(balanced_z(0.0), osr::InvalidArgument);
}

TEST_CASE("invalid learner parameters are rejected") {
  LearnerParams p;
  p.z = 1.0;
  CHECK_THROWS_AS(p.validate(), osr::InvalidArgument);
  p = {};
  p.L = 0.0;
  CHECK_THROWS_AS(p.validate(), osr::InvalidArgument);
  p = {};
  p.fixed_tolerance = -1.0;
  CHECK_THROWS_AS(p.validate(), osr::InvalidArgument);
}

TEST_CASE("relaxed thresholds of a point mass collapse onto the atom") {
  EmpiricalEstimator est;
  for (int i = 0; i < 10; ++i) est.add(0.3);
  const auto ab = relaxed_ab(est, 0.05, 0.1);
  CHECK(ab.a == doctest::Approx(0.3));
  CHECK(ab.b == doctest::Approx(0.3));
}

TEST_CASE("relaxed thresholds use the inflated cost") {
  EmpiricalEstimator est;
  for (double v : {0.1, 0.4, 0.7, 1.0}) est.add(v);
  const auto ab = relaxed_ab(est, 0.02, 0.03);
  const auto direct = osr::mc::compute_ab(Distribution::discrete({0.1, 0.4, 0.7, 1.0}, {0.25, 0.25, 0.25, 0.25}), 0.05);
  CHECK(ab.a == doctest::Approx(direct.a).epsilon(1e-12));
  CHECK(ab.b == doctest::Approx(direct.b).epsilon(1e-12));
  CHECK_THROWS_AS(relaxed_ab(EmpiricalEstimator{}, 0.02, 0.03), osr::EmptySampleSet);
}

TEST_CASE("relaxed thresholds concentrate around the exact ones") {
  const Distribution law = Distribution::exponential(4.0);
  const double c = 0.02;
  const auto exact = osr::mc::compute_ab(law, c);
  StreamRng rng(77);
  EmpiricalEstimator est;
  for (int i = 0; i < 200000; ++i) est.add(law.sample(rng));
  const auto ab = relaxed_ab(est, c, 0.0);
  CHECK(std::abs(ab.a - exact.a) < 0.02);
  CHECK(std::abs(ab.b - exact.b) < 0.02);
}

TEST_CASE("exact laws with zero tolerance reproduce the offline policy") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = oracle::random_small_instance(gen);
    const auto chans = to_channels(inst);
    LearnerParams p;
    p.L = 1e-9;
    p.fixed_tolerance = 0.0;
    std::vector<double> costs;
    std::vector<Distribution> laws;
    for (const auto& c : chans) {
      costs.push_back(c.cost);
      laws.push_back(c.dist);
    }
    OnlineMcLearner learner(costs, p);
    StreamRng rng(static_cast<std::uint64_t>(trial) + 1);
    std::vector<double> first;
    for (const auto& c : chans) first.push_back(c.dist.sample(rng));
    learner.initialize(first);
    learner.inject_laws(laws);

    const auto order = osr::mc::sort_channels(chans);
    const osr::mc::ValueTable table(chans, order.params);
    for (std::size_t t = 1; t <= 20; ++t) {
      std::vector<double> x;
      for (const auto& c : chans) x.push_back(c.dist.sample(rng));
      const auto online = learner.stage(t, x);
      const auto offline = osr::mc::simulate_mc_episode(chans, order, table, x);
      REQUIRE(online.phase == Phase::exploit);
      REQUIRE(online.episode.has_value());
      CHECK(online.net_reward == doctest::Approx(offline.net_reward).epsilon(1e-12));
      REQUIRE(online.episode->trace.size() == offline.trace.size());
      for (std::size_t k = 0; k < offline.trace.size(); ++k) CHECK(online.episode->trace[k].decision == offline.trace[k].decision);
    }
  }
}

TEST_CASE("exploration probes exactly the due channels") {
  LearnerParams p;
  OnlineMcLearner learner({0.01, 0.02, 0.03}, p);
  learner.initialize(std::vector<double>{0.5, 0.5, 0.5});
  const std::vector<double> x{0.2, 0.9, 0.4};
  const auto res = learner.stage(5, x);
  CHECK(res.phase == Phase::explore);
  CHECK(res.probed == std::vector<std::size_t>{0, 1, 2});
  CHECK(res.net_reward == doctest::Approx(0.9 - 0.06));
  CHECK(learner.counts() == std::vector<std::size_t>{2, 2, 2});
  CHECK(learner.exploration_stages() == 1);
}

TEST_CASE("exploration stages stay within the schedule budget") {
  LearnerParams p;
  const std::size_t n = 4;
  const std::size_t T = 1500;
  std::vector<Distribution> laws;
  for (std::size_t j = 0; j < n; ++j) laws.push_back(Distribution::exponential(2.0 + static_cast<double>(j)));
  OnlineMcLearner learner(std::vector<double>(n, 0.03), p);
  StreamRng rng(5);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = laws[j].sample(rng);
  learner.initialize(x);
  for (std::size_t t = 1; t <= T; ++t) {
    for (std::size_t j = 0; j < n; ++j) x[j] = laws[j].sample(rng);
    learner.stage(t, x);
  }
  const double bound = static_cast<double>(n) * std::ceil(exploration_threshold(p, double(T))) + double(n);
  CHECK(learner.exploration_stages() > 0);
  CHECK(static_cast<double>(learner.exploration_stages()) <= bound);
  for (std::size_t c : learner.counts()) CHECK(static_cast<double>(c) >= exploration_threshold(p, double(T)) - 1.0);
}

TEST_CASE("a single user with the exact law stops like the offline threshold") {
  osr::mu::MuConfig cfg;
  cfg.attempt_probs = {0.3};
  cfg.channel = Distribution::exponential(2.5);
  cfg.K = 10.0;
  LearnerParams p;
  p.L = 1e-9;
  OnlineMuLearner learner(cfg, p);
  learner.initialize(std::vector<double>{0.4});
  learner.inject_law(cfg.channel);
  const double ps = osr::mu::success_probability(cfg.attempt_probs);
  const double x_star = osr::mu::solve_threshold(cfg.channel, cfg.zeta, ps, cfg.K);
  CHECK(learner.threshold(0) == doctest::Approx(x_star));
  for (std::uint64_t l = 1; l <= 50; ++l) {
    osr::mu::ContentionStream a(cfg, l * 7919);
    osr::mu::ContentionStream b(cfg, l * 7919);
    const auto online = learner.stage(l, a);
    const auto offline = osr::mu::threshold_episode(cfg, x_star, b);
    CHECK(online.phase == Phase::exploit);
    CHECK(online.record.stopping_index == offline.stopping_index);
    CHECK(online.rate == offline.rate);
  }
}

TEST_CASE("exploring users transmit only when due and record every winner") {
  osr::mu::MuConfig cfg;
  cfg.attempt_probs = {0.2, 0.3, 0.4};
  cfg.channel = Distribution::uniform(0.0, 1.0);
  LearnerParams p;
  OnlineMuLearner learner(cfg, p);
  learner.initialize(std::vector<double>{0.1, 0.2, 0.3});
  osr::mu::ContentionStream stream(cfg, 1234);
  const auto res = learner.stage(10, stream);
  CHECK(res.phase == Phase::explore);
  std::size_t total = 0;
  for (std::size_t c : learner.counts()) total += c;
  CHECK(total == 3 + res.record.stopping_index);
}

TEST_CASE("pooled samples share one estimator") {
  osr::mu::MuConfig cfg;
  cfg.attempt_probs = {0.2, 0.3};
  cfg.channel = Distribution::uniform(0.0, 1.0);
  OnlineMuLearner learner(cfg, LearnerParams{}, true);
  learner.initialize(std::vector<double>{0.1, 0.2});
  CHECK(learner.estimator(0).count() == 2);
  CHECK(&learner.estimator(0) == &learner.estimator(1));
}
