#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "osr/config.hpp"

namespace osr::harness {

/// Per-stage tag written to the trace CSV.
enum class StageTag : std::uint8_t { explore, exploit, oracle };
const char* to_string(StageTag t) noexcept;

/// One policy on one replication, compared with the oracle stage by stage.
struct RegretTrace {
  std::string policy;
  std::vector<double> reward;
  std::vector<double> oracle_reward;
  std::vector<StageTag> tag;

  std::size_t stages() const noexcept { return reward.size(); }
  /// R(t) = sum_{s <= t} (oracle_s - reward_s), t = 1..T.
  std::vector<double> cumulative_regret() const;
};

/// Relaxed and exact thresholds of every channel at a chosen stage.
struct ThresholdSnapshot {
  std::size_t stage = 0;
  std::vector<mc::ChannelParams> relaxed;
  std::vector<mc::ChannelParams> exact;
};

struct ReplicationResult {
  std::size_t replication = 0;
  std::size_t units = 0;
  std::vector<RegretTrace> traces;
  std::size_t exploration_stages = 0;
  std::size_t forced_explorations = 0;
  std::vector<ThresholdSnapshot> snapshots;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> policies;
  std::vector<ReplicationResult> replications;  // ordered by replication index
};

/// Policy names in trace order for the configured model.
std::vector<std::string> policy_names(const ExperimentConfig& cfg);

/// Generated or explicit instance of replication r.
std::vector<mc::Channel> mc_instance(const ExperimentConfig& cfg, std::size_t r);
mu::MuConfig mu_instance(const ExperimentConfig& cfg, std::size_t r);

/// Realization tensor of replication r: row t (0..T) holds one draw per
/// channel; row 0 seeds the learners and is not scored.
std::vector<std::vector<double>> mc_realizations(const ExperimentConfig& cfg, std::size_t r,
                                                 std::span<const mc::Channel> channels);

/// Stream key of the contentions of stage l in replication r.
std::uint64_t mu_stage_key(const ExperimentConfig& cfg, std::size_t r, std::size_t l);

/// Runs every replication (concurrently, up to cfg.threads workers) and
/// returns the per-policy traces. Output depends only on the config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Single replication; exposed for tests and tools.
ReplicationResult run_replication(const ExperimentConfig& cfg, std::size_t r);

struct SweepCell {
  double L = 0.0;
  double z = 0.0;
  std::vector<double> per_replication;  // mean per-stage net reward of each replication
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Online multichannel learner over the L x z grid on shared instances and
/// realizations.
std::vector<SweepCell> sweep(const ExperimentConfig& cfg);

/// Runs `work(i)` for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& work);

/// Effective worker count of a config (0 means hardware concurrency).
std::size_t worker_count(std::size_t requested);

}  // namespace osr::harness
