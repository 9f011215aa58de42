#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "osr/mc.hpp"
#include "osr/value_table.hpp"

namespace osr::mc {

/// Sufficient statistic of a probing episode.
struct InfoState {
  double x = 0.0;                          // best observed reward
  ChannelSet remaining = 0;                // unprobed channels
  std::optional<std::size_t> best_channel;  // channel achieving x, if any probed
};

struct Probe {
  std::size_t channel;
};
struct AccessRecall {};
struct AccessGuess {
  std::size_t channel;
};
using Decision = std::variant<Probe, AccessRecall, AccessGuess>;

std::string describe(const Decision& d);
bool operator==(const Decision& a, const Decision& b);

struct RootResult {
  double value = 0.0;
  bool degenerate = false;  // residual flat at the root
};

/// Smallest d >= 0 with V(0, S) = -c_1 + E[V(max(d, X_1), S - {1})], where 1 is
/// `first`, the lead channel of S.
RootResult solve_ds(const ValueTable& table, ChannelSet s, std::size_t first);

/// g_i(x) = -c_i + E[V(max(X_i, x), S - {i})] for a lead channel i of S.
double g_value(const ValueTable& table, ChannelSet s, std::size_t i, double x);

/// Root of g_1(b0) = max{E[X_1], g_2(0)} on [b_2, b_1]. Throws CaseMismatch
/// if either earlier sub-case of the low-reserve branch applies (with the
/// same slack `tol` used by decide()).
double solve_b0(const ValueTable& table, const SortedOrder& order, ChannelSet s, double tol = 0.0);

/// Threshold decision rule. `order.tolerance` widens the sub-case tests;
/// zero gives the exact rule.
Decision decide(const InfoState& state, const SortedOrder& order, const ValueTable& table);

struct TraceStep {
  Decision decision;
  std::optional<double> revealed;  // value seen by a probe
};

struct EpisodeResult {
  double net_reward = 0.0;
  double accessed_value = 0.0;
  double probing_cost = 0.0;
  std::size_t accessed_channel = 0;
  std::vector<TraceStep> trace;
};

/// Runs decide() on pre-drawn realizations (one per channel) until access.
EpisodeResult simulate_mc_episode(std::span<const Channel> channels, const SortedOrder& order,
                                  const ValueTable& table, std::span<const double> realizations);

}  // namespace osr::mc
