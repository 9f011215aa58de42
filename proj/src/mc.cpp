#include "osr/mc.hpp"

#include <cmath>

#include "osr/error.hpp"
#include "osr/numeric.hpp"

namespace osr::mc {

void validate(const Channel& ch) {
  if (!std::isfinite(ch.cost) || ch.cost < 0.0) throw InvalidArgument("sensing cost must be finite and >= 0");
  if (!(ch.dist.mean() > 0.0)) throw InvalidArgument("channel mean must be positive");
}

ChannelParams compute_ab(const dist::Distribution& d, double cost) {
  if (!std::isfinite(cost) || cost < 0.0) throw InvalidArgument("sensing cost must be finite and >= 0");
  const double mean = d.mean();
  if (cost >= d.above(mean)) return {mean, mean};
  if (cost == 0.0) return {d.sup_value(), d.inf_value()};

  ChannelParams p;
  const double sup = d.sup_value();
  if (d.above(sup) > cost) {
    p.a = sup;
  } else {
    p.a = numeric::first_true([&](double u) { return d.above(u) <= cost; }, mean, sup);
  }
  const double inf = d.inf_value();
  p.b = numeric::last_true([&](double u) { return d.below(u) <= cost; }, inf, mean);
  return p;
}

double tie_break_score(const dist::Distribution& d, double cost, const ChannelParams& p, double tol) {
  if (std::abs(p.a - p.b) <= tol) return d.mean();
  const dist::CensoredStats s = dist::censored(d, p.a);
  if (!(s.tail > 0.0) || !s.cond_mean_above) return d.mean();
  return *s.cond_mean_above - cost / s.tail;
}

SortedOrder sort_channels(std::span<const Channel> channels) {
  std::vector<ChannelParams> params;
  params.reserve(channels.size());
  for (const Channel& ch : channels) params.push_back(compute_ab(ch));
  return sort_channels(channels, params, 0.0);
}

SortedOrder sort_channels(std::span<const Channel> channels, std::span<const ChannelParams> params,
                          double tol) {
  const std::size_t n = channels.size();
  if (n == 0) throw InvalidArgument("at least one channel is required");
  if (params.size() != n) throw InvalidArgument("one parameter pair per channel is required");
  SortedOrder out;
  out.params.assign(params.begin(), params.end());
  out.tolerance = tol;
  out.scores.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.scores[j] = tie_break_score(channels[j].dist, channels[j].cost, params[j], tol);
  }
  std::vector<bool> used(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    double amax = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j]) amax = std::max(amax, params[j].a);
    }
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const bool in_group = params[j].a == amax || amax - params[j].a < tol;
      if (!in_group) continue;
      if (best == n || out.scores[j] > out.scores[best]) best = j;
    }
    used[best] = true;
    out.perm.push_back(best);
  }
  return out;
}

}  // namespace osr::mc
