#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "osr/mc.hpp"
#include "osr/numeric.hpp"

namespace osr::mc {

/// Set of channel indices as a bitmask (bit j = channel j).
using ChannelSet = std::uint32_t;
inline constexpr std::size_t kMaxChannels = 20;

inline constexpr ChannelSet full_set(std::size_t n) noexcept {
  return n >= 32 ? ~ChannelSet{0} : static_cast<ChannelSet>((ChannelSet{1} << n) - 1);
}
inline constexpr bool contains(ChannelSet s, std::size_t j) noexcept { return (s >> j) & 1U; }
inline constexpr ChannelSet without(ChannelSet s, std::size_t j) noexcept {
  return s & ~(ChannelSet{1} << j);
}

struct TableOptions {
  std::size_t grid_size = 512;
  std::size_t max_grid_size = 8192;
  /// Largest change of V tolerated between a grid and its refinement.
  double refine_tolerance = 1e-4;
};

/// V(x, S): the optimal expected net reward with best observed reward x and
/// unprobed set S, where at each step one may access x, access an unprobed
/// channel blind, or pay c_j to observe X_j.
///
/// Every V(., S) is stored as a piecewise-linear curve on [0, A_S] with
/// A_S = max_{j in S} a_j; beyond A_S the value is x. For atomic laws the
/// curves are exact; analytic laws are integrated with Gauss-Legendre on the
/// knots of the continuation curve and interpolated on an x-grid.
///
/// Curves are computed lazily and memoized, so a table must not be queried
/// from several threads at once. Call `precompute()` first to make it safe.
class ValueTable {
 public:
  ValueTable(std::vector<Channel> channels, std::vector<ChannelParams> params, TableOptions options = {});

  std::size_t channel_count() const noexcept { return channels_.size(); }
  ChannelSet all() const noexcept { return full_set(channels_.size()); }
  const Channel& channel(std::size_t j) const { return channels_[j]; }
  const ChannelParams& params(std::size_t j) const { return params_[j]; }
  std::span<const double> base_knots() const noexcept { return base_; }
  const TableOptions& options() const noexcept { return options_; }

  /// A_S; zero for the empty set.
  double horizon(ChannelSet s) const;

  double value(double x, ChannelSet s) const;
  /// Expected net reward of probing j from (x, s), j in s:
  /// -c_j + E[V(max(x, X_j), s - {j})].
  double probe_value(std::size_t j, double x, ChannelSet s) const;
  /// max_{j in s} E[X_j]; zero for the empty set.
  double guess_value(ChannelSet s) const;

  const numeric::PiecewiseLinear& value_curve(ChannelSet s) const;
  const numeric::PiecewiseLinear& probe_curve(std::size_t j, ChannelSet s) const;

  /// Computes every subset curve eagerly.
  void precompute() const;

 private:
  numeric::PiecewiseLinear build_probe_curve(std::size_t j, ChannelSet s) const;
  numeric::PiecewiseLinear build_value_curve(ChannelSet s) const;
  std::vector<double> eval_points(std::size_t j, double lo_rest, double hi, const numeric::PiecewiseLinear* rest) const;

  std::vector<Channel> channels_;
  std::vector<ChannelParams> params_;
  TableOptions options_;
  std::vector<double> base_;  // grid used by analytic laws
  mutable std::unordered_map<ChannelSet, numeric::PiecewiseLinear> values_;
  mutable std::unordered_map<std::uint64_t, numeric::PiecewiseLinear> probes_;
};

/// Builds a fully computed table. When any law is analytic the grid is
/// doubled until V(., full set) moves by at most `refine_tolerance`; throws
/// GridTooCoarse if `max_grid_size` is reached first.
std::shared_ptr<const ValueTable> build_value_table(std::span<const Channel> channels,
                                                    std::span<const ChannelParams> params,
                                                    TableOptions options = {});

/// Convenience overload using compute_ab for every channel.
std::shared_ptr<const ValueTable> build_value_table(std::span<const Channel> channels, TableOptions options = {});

}  // namespace osr::mc
