#include "osr/baselines.hpp"

#include <cmath>

#include "osr/error.hpp"

namespace osr::baselines {

void ArmStats::record(std::size_t arm, double reward) {
  if (arm >= counts_.size()) throw InvalidArgument("arm index out of range");
  if (!std::isfinite(reward)) throw InvalidArgument("reward must be finite");
  ++counts_[arm];
  sums_[arm] += reward;
}

double ArmStats::mean(std::size_t arm) const {
  if (counts_.at(arm) == 0) throw UninitializedArm(arm);
  return sums_[arm] / static_cast<double>(counts_[arm]);
}

std::size_t ucb1_select(const ArmStats& stats, double t) {
  if (stats.arms() == 0) throw InvalidArgument("no arms");
  const double log_t = std::log(std::max(t, 1.0));
  std::size_t best = 0;
  double best_index = -INFINITY;
  for (std::size_t j = 0; j < stats.arms(); ++j) {
    if (stats.count(j) == 0) throw UninitializedArm(j);
    const double index = stats.mean(j) + std::sqrt(2.0 * log_t / static_cast<double>(stats.count(j)));
    if (index > best_index) {
      best_index = index;
      best = j;
    }
  }
  return best;
}

std::size_t best_single(std::span<const double> means) {
  if (means.empty()) throw InvalidArgument("no channels");
  std::size_t best = 0;
  for (std::size_t j = 1; j < means.size(); ++j) {
    if (means[j] > means[best]) best = j;
  }
  return best;
}

std::size_t best_single(std::span<const mc::Channel> channels) {
  std::vector<double> means;
  means.reserve(channels.size());
  for (const auto& c : channels) means.push_back(c.dist.mean());
  return best_single(means);
}

std::size_t random_select(std::size_t n, StreamRng& rng) {
  if (n == 0) throw InvalidArgument("no channels");
  return static_cast<std::size_t>(uniform_index(rng, n));
}

}  // namespace osr::baselines
