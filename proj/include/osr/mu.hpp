#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "osr/dist.hpp"
#include "osr/error.hpp"
#include "osr/rng.hpp"

namespace osr::mu {

inline constexpr std::size_t kDefaultContentionCap = 1'000'000;

/// Multiuser, single-channel contention system.
struct MuConfig {
  std::vector<double> attempt_probs;  // p_i, one per user
  double zeta = 1.0;                  // carrier-sense duration (slots)
  double K = 10.0;                    // transmission duration (slots)
  dist::Distribution channel = dist::Distribution::exponential(1.0);
  std::size_t contention_cap = kDefaultContentionCap;

  std::size_t users() const noexcept { return attempt_probs.size(); }
  /// Throws InvalidArgument on bad fields or a zero success probability.
  void validate() const;
};

/// Probability that exactly one user attempts in a slot.
double success_probability(std::span<const double> p);

/// P(user i wins | the contention succeeded).
std::vector<double> winner_distribution(std::span<const double> p);

/// Root of E[(X-u)+] = u zeta / (ps K).
double solve_threshold(const dist::Distribution& channel, double zeta, double ps, double K);

/// Long-run rate of the rule "transmit once X >= u". Throws ZeroTail.
double rate_of_return(const dist::Distribution& channel, double u, double zeta, double ps, double K);

/// One successful contention: its duration, the winner and the quality seen.
struct Contention {
  double eta;
  std::size_t winner;
  double quality;
};

/// Lazily generated sequence of successful contentions of one meta stage.
/// Entry k is a pure function of (key, k) so several policies can walk the
/// same sequence independently.
class ContentionStream {
 public:
  ContentionStream(const MuConfig& cfg, std::uint64_t key);

  const Contention& at(std::size_t k);
  std::size_t generated() const noexcept { return items_.size(); }

 private:
  const MuConfig* cfg_;
  double ps_;
  std::vector<double> cum_winner_;
  StreamRng rng_;
  std::vector<Contention> items_;
};

struct MuEpisodeRecord {
  std::size_t stopping_index = 0;  // tau, 1-based count of contentions
  std::vector<double> qualities;
  std::vector<double> contention_times;
  std::size_t transmitter = 0;
  double total_time = 0.0;  // sum of eta plus K
  double reward = 0.0;      // X * K
  double rate = 0.0;        // reward / total_time
};

/// Walks `stream` until `transmit(contention, k)` returns true.
/// Throws EpisodeTooLong past `cap` contentions.
template <class Rule>
MuEpisodeRecord run_episode(ContentionStream& stream, double K, std::size_t cap, Rule&& transmit) {
  MuEpisodeRecord rec;
  double elapsed = 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k >= cap) throw EpisodeTooLong("no transmission within " + std::to_string(cap) + " contentions");
    const Contention& c = stream.at(k);
    elapsed += c.eta;
    rec.qualities.push_back(c.quality);
    rec.contention_times.push_back(c.eta);
    if (transmit(c, k)) {
      rec.stopping_index = k + 1;
      rec.transmitter = c.winner;
      rec.total_time = elapsed + K;
      rec.reward = c.quality * K;
      rec.rate = rec.reward / rec.total_time;
      return rec;
    }
  }
}

/// Threshold rule: the first winner seeing X >= threshold transmits.
MuEpisodeRecord simulate_mu_episode(const MuConfig& cfg, double threshold, StreamRng& rng);

/// Same rule on an existing stream.
MuEpisodeRecord threshold_episode(const MuConfig& cfg, double threshold, ContentionStream& stream);

}  // namespace osr::mu
