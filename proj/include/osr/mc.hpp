#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "osr/dist.hpp"

namespace osr::mc {

struct Channel {
  dist::Distribution dist;
  double cost = 0.0;
};

/// Throws InvalidArgument on a negative or non-finite cost.
void validate(const Channel& ch);

/// Upper threshold a and lower threshold b of one channel.
struct ChannelParams {
  double a = 0.0;
  double b = 0.0;
};

/// a = smallest u >= mean with E[(X-u)+] <= c, b = largest u <= mean with
/// E[(u-X)+] <= c. Both equal the mean once c >= E[(X-mean)+]; with c = 0 they
/// sit on the support bounds.
ChannelParams compute_ab(const dist::Distribution& d, double cost);
inline ChannelParams compute_ab(const Channel& ch) { return compute_ab(ch.dist, ch.cost); }

/// Within-group ranking key: E[X] when a and b coincide (within `tol`),
/// otherwise E[X | X >= a] - c / P(X >= a).
double tie_break_score(const dist::Distribution& d, double cost, const ChannelParams& p, double tol = 0.0);

/// Channels relabelled by repeated selection of the max-a group.
struct SortedOrder {
  std::vector<std::size_t> perm;              // position -> channel index
  std::vector<ChannelParams> params;          // per channel index (not position)
  std::vector<double> scores;                 // per channel index
  double tolerance = 0.0;

  std::size_t size() const noexcept { return perm.size(); }
  const ChannelParams& at_position(std::size_t k) const { return params[perm[k]]; }
};

/// Exact ordering: groups are channels sharing the maximal a; the best score
/// wins and ties go to the lowest index.
SortedOrder sort_channels(std::span<const Channel> channels);

/// Ordering on supplied parameters with a slack: the group is every channel
/// whose a is within `tol` (strictly) of the current maximum. tol = 0 gives
/// the exact ordering.
SortedOrder sort_channels(std::span<const Channel> channels, std::span<const ChannelParams> params,
                          double tol);

}  // namespace osr::mc
