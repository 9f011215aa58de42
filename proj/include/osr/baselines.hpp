#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "osr/mc.hpp"
#include "osr/rng.hpp"

namespace osr::baselines {

/// Pull counts and reward sums per arm.
class ArmStats {
 public:
  explicit ArmStats(std::size_t arms) : counts_(arms, 0), sums_(arms, 0.0) {}

  void record(std::size_t arm, double reward);
  std::size_t arms() const noexcept { return counts_.size(); }
  std::size_t count(std::size_t arm) const { return counts_.at(arm); }
  double sum(std::size_t arm) const { return sums_.at(arm); }
  double mean(std::size_t arm) const;

 private:
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
};

/// argmax_j mean_j + sqrt(2 ln t / n_j), ties to the lowest index.
/// Throws UninitializedArm if some arm was never pulled.
std::size_t ucb1_select(const ArmStats& stats, double t);

/// Channel with the largest mean, ties to the lowest index.
std::size_t best_single(std::span<const double> means);
std::size_t best_single(std::span<const mc::Channel> channels);

/// Uniform channel index in [0, n).
std::size_t random_select(std::size_t n, StreamRng& rng);

}  // namespace osr::baselines
