#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "osr/error.hpp"
#include "osr/mc.hpp"
#include "osr/value_table.hpp"

using osr::StreamRng;
using osr::dist::Distribution;
using namespace osr::mc;

namespace {

std::vector<Channel> to_channels(const oracle::SmallInstance& inst) {
  std::vector<Channel> out;
  for (std::size_t j = 0; j < inst.laws.size(); ++j) {
    out.push_back({Distribution::discrete(inst.laws[j].v, inst.laws[j].p), inst.costs[j]});
  }
  return out;
}

}  // namespace

TEST_CASE("a and b of Exp(1) with c = 0.1") {
  const auto p = compute_ab(Distribution::exponential(1.0), 0.1);
  CHECK(std::abs(p.a - std::log(10.0)) < 1e-9);
  const double b_ref = oracle::bisect_root([](double u) { return u - 1 + std::exp(-u) - 0.1; }, 0.0, 1.0);
  CHECK(std::abs(p.b - b_ref) < 1e-9);
  CHECK(std::abs(p.b - 0.4832) < 1e-4);
}

TEST_CASE("a and b collapse to the mean for a large cost") {
  const auto d = Distribution::uniform(0.9, 1.1);
  CHECK(d.above(1.0) == doctest::Approx(0.025));
  const auto p = compute_ab(d, 0.2);
  CHECK(p.a == 1.0);
  CHECK(p.b == 1.0);
}

TEST_CASE("zero cost puts a and b on the support bounds") {
  const auto p = compute_ab(Distribution::uniform(0.2, 0.7), 0.0);
  CHECK(p.a == 0.7);
  CHECK(p.b == 0.2);
  const auto q = compute_ab(Distribution::discrete({1.0, 3.0}, {0.5, 0.5}), 0.0);
  CHECK(q.a == 3.0);
  CHECK(q.b == 1.0);
}

TEST_CASE("a/b duality residuals on random laws") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    Distribution d = Distribution::exponential(0.2 + 4 * u(gen));
    if (i % 3 == 1) {
      const double lo = u(gen);
      d = Distribution::uniform(lo, lo + 0.1 + u(gen));
    } else if (i % 3 == 2) {
      auto inst = oracle::random_small_instance(gen, 1, 4);
      d = Distribution::discrete(inst.laws[0].v, inst.laws[0].p);
    }
    const double c = 0.3 * u(gen);
    const auto p = compute_ab(d, c);
    CHECK(p.b <= d.mean());
    CHECK(d.mean() <= p.a);
    CHECK(d.above(p.a) <= c + 1e-12);
    CHECK(d.below(p.b) <= c + 1e-12);
    const bool collapsed = c >= d.above(d.mean());
    CHECK((p.a == p.b) == collapsed);
    if (!collapsed) {
      CHECK(std::abs(d.above(p.a) - c) <= 1e-8);
      if (p.b > d.inf_value()) CHECK(std::abs(d.below(p.b) - c) <= 1e-8);
    }
  }
}

TEST_CASE("sorting") {
  std::vector<Channel> one{{Distribution::exponential(1.0), 0.1}};
  CHECK(sort_channels(one).perm == std::vector<std::size_t>{0});

  std::vector<Channel> twins{{Distribution::exponential(1.0), 0.1}, {Distribution::exponential(1.0), 0.1}};
  CHECK(sort_channels(twins).perm == std::vector<std::size_t>{0, 1});

  std::vector<Channel> mixed{{Distribution::exponential(1.0), 0.1}, {Distribution::uniform(0.0, 0.5), 0.2}};
  const auto o = sort_channels(mixed);
  CHECK(o.params[0].a == doctest::Approx(2.302585).epsilon(1e-6));
  CHECK(o.params[1].a == 0.25);
  CHECK(o.perm == std::vector<std::size_t>{0, 1});

  std::vector<Channel> reversed{{Distribution::uniform(0.0, 0.5), 0.2}, {Distribution::exponential(1.0), 0.1}};
  CHECK(sort_channels(reversed).perm == std::vector<std::size_t>{1, 0});
}

TEST_CASE("sorted order invariants on random instances") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<Channel> chans;
    for (int j = 0; j < 5; ++j) {
      // Point masses and equal-cost twins create equal-a groups.
      if (j % 2 == 0) {
        chans.push_back({Distribution::discrete({0.5}, {1.0}), 0.05});
      } else {
        chans.push_back({Distribution::exponential(0.5 + 3 * u(gen)), 0.1 * u(gen)});
      }
    }
    const auto o = sort_channels(chans);
    for (std::size_t k = 1; k < o.perm.size(); ++k) {
      const auto prev = o.perm[k - 1], cur = o.perm[k];
      CHECK(o.params[prev].a >= o.params[cur].a);
      if (o.params[prev].a == o.params[cur].a) {
        CHECK(o.scores[prev] >= o.scores[cur]);
        if (o.scores[prev] == o.scores[cur]) CHECK(prev < cur);
      }
    }
  }
}

TEST_CASE("relaxed grouping merges close a values") {
  std::vector<Channel> chans{{Distribution::exponential(1.0), 0.1}, {Distribution::exponential(0.9), 0.1}};
  std::vector<ChannelParams> params{compute_ab(chans[0]), compute_ab(chans[1])};
  CHECK(sort_channels(chans, params, 0.0).perm == std::vector<std::size_t>{1, 0});
  // With a slack wider than the a spread the order follows the scores only.
  const auto wide = sort_channels(chans, params, 10.0);
  CHECK(wide.scores[0] == doctest::Approx(chans[0].dist.mean()));
}

TEST_CASE("value table boundary and single-channel values") {
  std::vector<Channel> one{{Distribution::exponential(1.0), 0.1}};
  const auto t = build_value_table(one);
  CHECK(t->value(0.3, 0) == 0.3);
  CHECK(std::abs(t->value(0.0, 1) - 1.0) < 1e-12);
  // Single channel: max{x, E[X], -c + x + E[(X-x)+]} on a few points.
  for (double x : {0.0, 0.5, 1.0, 1.7, 2.5}) {
    const double ref = std::max({x, 1.0, -0.1 + x + std::exp(-x)});
    CHECK(std::abs(t->value(x, 1) - ref) < 1e-4);
  }
}

TEST_CASE("zero costs: V(0, all) is the expected maximum") {
  std::vector<Channel> chans{{Distribution::exponential(1.0), 0.0},
                             {Distribution::exponential(2.0), 0.0},
                             {Distribution::uniform(0.2, 1.2), 0.0}};
  const auto t = build_value_table(chans);
  StreamRng rng(osr::stream_key(5, {}));
  double acc = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    double m = 0.0;
    for (const auto& c : chans) m = std::max(m, c.dist.sample(rng));
    acc += m;
  }
  CHECK(std::abs(t->value(0.0, t->all()) - acc / n) < 1e-2);
}

TEST_CASE("exact agreement with the exhaustive subset recursion on discrete laws") {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 150; ++i) {
    const auto inst = oracle::random_small_instance(gen, 4, 4);
    oracle::SubsetDp dp(inst.laws, inst.costs);
    const auto chans = to_channels(inst);
    const auto t = build_value_table(chans);
    const unsigned full = (1U << chans.size()) - 1;
    CHECK(std::abs(t->value(0.0, full) - dp.value(0.0, full)) <= 1e-9);
    for (unsigned s = 1; s <= full; ++s) {
      for (double x : {0.0, 0.15, 0.4, 0.75}) {
        CHECK(std::abs(t->value(x, s) - dp.value(x, s)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("value table invariants on an analytic instance") {
  std::vector<Channel> chans{{Distribution::exponential(2.0), 0.02},
                             {Distribution::exponential(4.0), 0.05},
                             {Distribution::uniform(0.0, 0.5), 0.01},
                             {Distribution::exponential(3.0), 0.08}};
  const auto t = build_value_table(chans);
  const ChannelSet full = t->all();
  for (ChannelSet s = 0; s <= full; ++s) {
    double prev = -INFINITY;
    for (double x : t->base_knots()) {
      const double v = t->value(x, s);
      CHECK(v >= x);
      CHECK(v >= prev - 1e-12);
      prev = v;
      for (std::size_t j = 0; j < chans.size(); ++j) {
        if (contains(s, j)) CHECK(v + 1e-12 >= t->value(x, without(s, j)));
      }
    }
  }
}

TEST_CASE("analytic probe curve against independent integration") {
  std::vector<Channel> chans{{Distribution::exponential(1.5), 0.03}, {Distribution::uniform(0.1, 0.9), 0.02}};
  const auto t = build_value_table(chans);
  for (std::size_t j = 0; j < 2; ++j) {
    const ChannelSet rest = without(t->all(), j);
    const auto& d = chans[j].dist;
    for (double x : {0.0, 0.2, 0.45, 0.8}) {
      // E[V(max(x, X), rest)] with V read from the table itself.
      auto integrand = [&](double y) { return t->value(std::max(x, y), rest) * d.pdf(y); };
      double ref = 0.0;
      if (d.kind() == osr::dist::Kind::uniform) {
        ref = oracle::simpson(integrand, 0.1, 0.9, 40000);
      } else {
        ref = oracle::simpson(integrand, 0.0, 40.0, 400000);
      }
      ref -= chans[j].cost;
      CHECK(std::abs(t->probe_value(j, x, t->all()) - ref) < 2e-5);
    }
  }
}

TEST_CASE("grid refinement settles and reports failure when capped") {
  std::vector<Channel> chans{{Distribution::exponential(2.0), 0.02}, {Distribution::exponential(3.0), 0.01}};
  TableOptions coarse;
  coarse.grid_size = 64;
  coarse.max_grid_size = 64;
  CHECK_THROWS_AS(build_value_table(chans, coarse), osr::GridTooCoarse);

  TableOptions opts;
  const auto t = build_value_table(chans, opts);
  opts.grid_size = 4 * t->options().grid_size;
  opts.max_grid_size = 4 * opts.grid_size;
  ValueTable fine(chans, {compute_ab(chans[0]), compute_ab(chans[1])}, opts);
  for (double x : t->base_knots()) CHECK(std::abs(fine.value(x, 3) - t->value(x, 3)) <= 1e-4);
}
