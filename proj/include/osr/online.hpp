#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "osr/dist.hpp"
#include "osr/mc.hpp"
#include "osr/mu.hpp"
#include "osr/policy.hpp"
#include "osr/value_table.hpp"

namespace osr::online {

enum class LogBase { e, ten };
enum class Mode { standard, adaptive };
enum class Phase { explore, exploit };

const char* to_string(Phase p) noexcept;

struct LearnerParams {
  double L = 10.0;
  double z = 0.2;
  LogBase log_base = LogBase::e;
  Mode mode = Mode::standard;
  double theta = 0.1;  // tolerance exponent of the adaptive mode
  /// Overrides the stage tolerance when set (0 reproduces the offline rule).
  std::optional<double> fixed_tolerance;

  void validate() const;
};

/// z = 2 / (2 + alpha) for a Lipschitz-type exponent alpha.
double balanced_z(double alpha);

/// D1(t) = L t^z log t.
double exploration_threshold(const LearnerParams& p, double t);

/// Units whose sample count is still below D1(t).
std::vector<std::size_t> exploration_due(std::span<const std::size_t> counts, double t, const LearnerParams& p);

/// Slack of the stage-t comparisons: t^{-z/2}, or t^{-theta} in adaptive mode.
double tolerance(const LearnerParams& p, double t);

/// compute_ab on the fitted empirical law with the cost inflated by `tol`.
mc::ChannelParams relaxed_ab(const dist::EmpiricalEstimator& est, double cost, double tol);

/// Ordering with the max-a group widened by `tol`.
mc::SortedOrder relaxed_sort(std::span<const mc::Channel> channels, std::span<const mc::ChannelParams> params,
                             double tol);

struct McStageResult {
  double net_reward = 0.0;
  Phase phase = Phase::explore;
  bool forced = false;               // exploitation failed and fell back to exploring all
  std::vector<std::size_t> probed;   // channels sensed this stage
  std::optional<mc::EpisodeResult> episode;
};

/// Multichannel learner: explores under-sampled channels, otherwise runs the
/// threshold rule on fitted empirical laws with relaxed comparisons.
class OnlineMcLearner {
 public:
  OnlineMcLearner(std::vector<double> costs, LearnerParams params, mc::TableOptions table = {});

  /// One sample per channel, taken before the first counted stage.
  void initialize(std::span<const double> first_samples);

  McStageResult stage(std::size_t t, std::span<const double> realizations);
  McStageResult explore(std::span<const std::size_t> channels, std::span<const double> realizations);
  McStageResult exploit(std::size_t t, std::span<const double> realizations);

  /// Replaces the fitted laws used in exploitation by fixed ones.
  void inject_laws(std::vector<dist::Distribution> laws);

  /// Relaxed (a, b) of channel j at stage t from its current samples.
  mc::ChannelParams relaxed_params(std::size_t j, std::size_t t) const;

  std::size_t channels() const noexcept { return costs_.size(); }
  const dist::EmpiricalEstimator& estimator(std::size_t j) const { return estimators_[j]; }
  std::vector<std::size_t> counts() const;
  std::size_t exploration_stages() const noexcept { return explorations_; }
  std::size_t forced_explorations() const noexcept { return forced_; }
  const LearnerParams& params() const noexcept { return params_; }

 private:
  double stage_tolerance(std::size_t t) const;
  std::vector<mc::Channel> current_channels() const;

  std::vector<double> costs_;
  LearnerParams params_;
  mc::TableOptions table_options_;
  std::vector<dist::EmpiricalEstimator> estimators_;
  std::optional<std::vector<dist::Distribution>> injected_;
  std::size_t explorations_ = 0;
  std::size_t forced_ = 0;
};

struct MuStageResult {
  double rate = 0.0;
  Phase phase = Phase::explore;
  mu::MuEpisodeRecord record;
};

/// Multiuser learner: each user estimates the channel law from the qualities
/// it has observed and applies its own estimated threshold.
class OnlineMuLearner {
 public:
  OnlineMuLearner(mu::MuConfig cfg, LearnerParams params, bool pool_samples = false);

  void initialize(std::span<const double> first_samples);
  MuStageResult stage(std::size_t l, mu::ContentionStream& stream);

  void inject_law(dist::Distribution law);

  std::size_t users() const noexcept { return cfg_.users(); }
  std::vector<std::size_t> counts() const;
  std::size_t exploration_stages() const noexcept { return explorations_; }
  const dist::EmpiricalEstimator& estimator(std::size_t user) const;
  /// Threshold the user would apply now.
  double threshold(std::size_t user) const;

 private:
  dist::EmpiricalEstimator& samples_of(std::size_t user);

  mu::MuConfig cfg_;
  LearnerParams params_;
  bool pool_;
  double ps_;
  std::vector<dist::EmpiricalEstimator> estimators_;
  std::vector<std::size_t> observed_;  // per-user observation counts
  std::optional<dist::Distribution> injected_;
  std::size_t explorations_ = 0;
};

}  // namespace osr::online
