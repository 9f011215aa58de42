#include "osr/mu.hpp"

#include <cmath>

#include "osr/error.hpp"
#include "osr/numeric.hpp"

namespace osr::mu {

void MuConfig::validate() const {
  if (attempt_probs.empty()) throw InvalidArgument("at least one user is required");
  for (double p : attempt_probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("attempt probabilities must lie in [0, 1]");
  }
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidArgument("zeta must be positive");
  if (!(K > 0.0) || !std::isfinite(K)) throw InvalidArgument("K must be positive");
  if (contention_cap == 0) throw InvalidArgument("contention cap must be positive");
  if (!(success_probability(attempt_probs) > 0.0)) {
    throw InvalidArgument("success probability is zero; contention never succeeds");
  }
}

double success_probability(std::span<const double> p) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double term = p[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) term *= 1.0 - p[j];
    }
    total += term;
  }
  return total;
}

std::vector<double> winner_distribution(std::span<const double> p) {
  const double ps = success_probability(p);
  if (!(ps > 0.0)) throw InvalidArgument("success probability is zero");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double term = p[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) term *= 1.0 - p[j];
    }
    out[i] = term / ps;
  }
  return out;
}

double solve_threshold(const dist::Distribution& channel, double zeta, double ps, double K) {
  if (!(ps > 0.0) || !(K > 0.0) || !(zeta > 0.0)) {
    throw InvalidArgument("solve_threshold needs ps, K, zeta > 0");
  }
  const double mean = channel.mean();
  const double slope = zeta / (ps * K);
  // g(0) = mean > 0 and g(psK mean / zeta) = above(.) - mean <= 0.
  const double hi = mean / slope;
  if (!std::isfinite(hi)) throw SolverDiverged("threshold bracket diverged");
  auto residual_nonpositive = [&](double u) { return channel.above(u) - u * slope <= 0.0; };
  return numeric::first_true(residual_nonpositive, 0.0, hi);
}

double rate_of_return(const dist::Distribution& channel, double u, double zeta, double ps, double K) {
  const dist::CensoredStats s = dist::censored(channel, u);
  if (!(s.tail > 0.0) || !s.cond_mean_above) throw ZeroTail(u);
  return *s.cond_mean_above * K / (zeta / (ps * s.tail) + K);
}

ContentionStream::ContentionStream(const MuConfig& cfg, std::uint64_t key)
    : cfg_(&cfg), ps_(success_probability(cfg.attempt_probs)), rng_(key) {
  const std::vector<double> w = winner_distribution(cfg.attempt_probs);
  cum_winner_.resize(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    cum_winner_[i] = acc;
  }
}

const Contention& ContentionStream::at(std::size_t k) {
  while (items_.size() <= k) {
    // Slots until the first success, each costing zeta.
    double slots = 1.0;
    if (ps_ < 1.0) {
      const double u = 1.0 - rng_.uniform01();  // (0, 1]
      slots += std::floor(std::log(u) / std::log1p(-ps_));
    } else {
      rng_();
    }
    const double r = rng_.uniform01() * cum_winner_.back();
    std::size_t winner = 0;
    while (winner + 1 < cum_winner_.size() && !(r < cum_winner_[winner])) ++winner;
    const double x = cfg_->channel.sample(rng_);
    items_.push_back({slots * cfg_->zeta, winner, x});
  }
  return items_[k];
}

MuEpisodeRecord threshold_episode(const MuConfig& cfg, double threshold, ContentionStream& stream) {
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be >= 0");
  return run_episode(stream, cfg.K, cfg.contention_cap,
                     [threshold](const Contention& c, std::size_t) { return c.quality >= threshold; });
}

MuEpisodeRecord simulate_mu_episode(const MuConfig& cfg, double threshold, StreamRng& rng) {
  ContentionStream stream(cfg, rng());
  return threshold_episode(cfg, threshold, stream);
}

}  // namespace osr::mu
