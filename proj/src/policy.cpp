#include "osr/policy.hpp"

#include <algorithm>
#include <cmath>

#include "osr/error.hpp"
#include "osr/numeric.hpp"

namespace osr::mc {

namespace {

double slack(double v) { return 1e-13 * std::max(1.0, std::abs(v)); }

std::vector<std::size_t> lead_order(const SortedOrder& order, ChannelSet s) {
  std::vector<std::size_t> out;
  for (std::size_t j : order.perm) {
    if (contains(s, j)) out.push_back(j);
  }
  return out;
}

}  // namespace

std::string describe(const Decision& d) {
  if (const auto* p = std::get_if<Probe>(&d)) return "probe(" + std::to_string(p->channel) + ")";
  if (const auto* g = std::get_if<AccessGuess>(&d)) return "guess(" + std::to_string(g->channel) + ")";
  return "recall";
}

bool operator==(const Decision& a, const Decision& b) {
  if (a.index() != b.index()) return false;
  if (const auto* p = std::get_if<Probe>(&a)) return p->channel == std::get<Probe>(b).channel;
  if (const auto* g = std::get_if<AccessGuess>(&a)) return g->channel == std::get<AccessGuess>(b).channel;
  return true;
}

RootResult solve_ds(const ValueTable& table, ChannelSet s, std::size_t first) {
  if (!contains(s, first)) throw InvalidArgument("lead channel is not in the set");
  const double v0 = table.value(0.0, s);
  const double level = v0 - slack(v0);
  auto reaches = [&](double d) { return table.probe_value(first, d, s) >= level; };
  // The root is ill-posed when X_1 <= d has no mass or the residual is flat.
  auto flat_at = [&](double d) {
    if (table.channel(first).dist.cdf(d) == 0.0) return true;
    if (d >= table.horizon(s)) return false;
    return std::abs(table.probe_curve(first, s).right_slope(d)) <= 1e-12;
  };
  if (reaches(0.0)) return {0.0, flat_at(0.0)};
  double hi = table.horizon(s);
  if (!reaches(hi)) {
    // Beyond the horizon W(d) = -c + d + E[(X-d)+] >= d - c.
    const double lo = hi;
    hi = std::max(hi, v0 + table.channel(first).cost) * (1.0 + 1e-12) + 1e-12;
    const double d = numeric::first_true(reaches, lo, hi);
    return {d, table.channel(first).dist.cdf(d) == 0.0};
  }
  const double d = numeric::first_true(reaches, 0.0, hi);
  return {d, flat_at(d)};
}

double g_value(const ValueTable& table, ChannelSet s, std::size_t i, double x) {
  return table.probe_value(i, x, s);
}

double solve_b0(const ValueTable& table, const SortedOrder& order, ChannelSet s, double tol) {
  const std::vector<std::size_t> lead = lead_order(order, s);
  if (lead.size() < 2) throw CaseMismatch("switch point needs two lead channels");
  const std::size_t i1 = lead[0];
  const std::size_t i2 = lead[1];
  const ChannelParams& p1 = order.params[i1];
  const ChannelParams& p2 = order.params[i2];
  if (p1.b >= p2.a - tol) throw CaseMismatch("lead channel is guessed outright");
  const double e1 = table.channel(i1).dist.mean();
  const double target = std::max(e1, g_value(table, s, i2, 0.0));
  if (p2.b >= p1.b - tol || g_value(table, s, i1, 0.0) >= target - tol) {
    throw CaseMismatch("lead channel is probed outright");
  }
  auto reaches = [&](double u) { return g_value(table, s, i1, u) >= target; };
  if (reaches(p2.b)) return p2.b;
  return numeric::first_true(reaches, p2.b, p1.b);
}

Decision decide(const InfoState& state, const SortedOrder& order, const ValueTable& table) {
  const ChannelSet s = state.remaining & table.all();
  const std::vector<std::size_t> lead = lead_order(order, s);
  const double x = state.x;
  const bool probed = state.best_channel.has_value();
  if (lead.empty()) return AccessRecall{};

  if (lead.size() == 1) {
    const std::size_t j = lead[0];
    const Channel& ch = table.channel(j);
    const double probe = -ch.cost + x + ch.dist.above(x);
    const double guess = ch.dist.mean();
    const double best = std::max({probed ? x : -INFINITY, guess, probe});
    if (probed && x >= best) return AccessRecall{};
    if (guess >= best) return AccessGuess{j};
    return Probe{j};
  }

  const double tol = order.tolerance;
  double a_max = -INFINITY;
  for (std::size_t j : lead) a_max = std::max(a_max, order.params[j].a);
  if (probed && x >= a_max) return AccessRecall{};

  const std::size_t i1 = lead[0];
  const std::size_t i2 = lead[1];
  // d_s >= 0, so the reserve test can only fire once something was observed.
  if (x > 0.0 && x > solve_ds(table, s, i1).value) return Probe{i1};

  const ChannelParams& p1 = order.params[i1];
  const ChannelParams& p2 = order.params[i2];
  if (p1.b >= p2.a - tol) return AccessGuess{i1};

  const double e1 = table.channel(i1).dist.mean();
  const double g2 = g_value(table, s, i2, 0.0);
  const double target = std::max(e1, g2);
  if (p2.b >= p1.b - tol || g_value(table, s, i1, 0.0) >= target - tol) return Probe{i1};

  const double b0 = solve_b0(table, order, s, tol);
  if (x >= b0) return Probe{i1};
  if (e1 >= g2) return AccessGuess{i1};
  return Probe{i2};
}

EpisodeResult simulate_mc_episode(std::span<const Channel> channels, const SortedOrder& order,
                                  const ValueTable& table, std::span<const double> realizations) {
  const std::size_t n = channels.size();
  if (realizations.size() != n) throw InvalidArgument("one realization per channel is required");
  EpisodeResult out;
  InfoState state;
  state.remaining = full_set(n);
  for (std::size_t step = 0; step <= n + 1; ++step) {
    const Decision d = decide(state, order, table);
    if (const auto* p = std::get_if<Probe>(&d)) {
      if (!contains(state.remaining, p->channel)) throw InvalidArgument("policy probed a channel twice");
      const double v = realizations[p->channel];
      out.probing_cost += channels[p->channel].cost;
      if (!state.best_channel || v > state.x) {
        state.x = std::max(state.x, v);
        state.best_channel = p->channel;
      }
      state.remaining = without(state.remaining, p->channel);
      out.trace.push_back({d, v});
      continue;
    }
    out.trace.push_back({d, std::nullopt});
    if (const auto* g = std::get_if<AccessGuess>(&d)) {
      out.accessed_channel = g->channel;
      out.accessed_value = realizations[g->channel];
    } else {
      if (!state.best_channel) throw InvalidArgument("recall requested before any probe");
      out.accessed_channel = *state.best_channel;
      out.accessed_value = state.x;
    }
    out.net_reward = out.accessed_value - out.probing_cost;
    return out;
  }
  throw InvalidArgument("probing episode did not terminate");
}

}  // namespace osr::mc
