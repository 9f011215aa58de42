#include "osr/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "osr/error.hpp"

namespace osr::online {

const char* to_string(Phase p) noexcept { return p == Phase::explore ? "explore" : "exploit"; }

void LearnerParams::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("L must be positive");
  if (!(z > 0.0 && z < 1.0)) throw InvalidArgument("z must lie in (0, 1)");
  if (!(theta > 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be positive");
  if (fixed_tolerance && !(*fixed_tolerance >= 0.0)) throw InvalidArgument("tolerance must be >= 0");
}

double balanced_z(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive");
  return 2.0 / (2.0 + alpha);
}

double exploration_threshold(const LearnerParams& p, double t) {
  if (t <= 1.0) return 0.0;
  const double lg = p.log_base == LogBase::e ? std::log(t) : std::log10(t);
  return p.L * std::pow(t, p.z) * lg;
}

std::vector<std::size_t> exploration_due(std::span<const std::size_t> counts, double t, const LearnerParams& p) {
  const double d1 = exploration_threshold(p, t);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (static_cast<double>(counts[j]) < d1) out.push_back(j);
  }
  return out;
}

double tolerance(const LearnerParams& p, double t) {
  if (p.fixed_tolerance) return *p.fixed_tolerance;
  t = std::max(t, 1.0);
  return p.mode == Mode::standard ? std::pow(t, -0.5 * p.z) : std::pow(t, -p.theta);
}

mc::ChannelParams relaxed_ab(const dist::EmpiricalEstimator& est, double cost, double tol) {
  return mc::compute_ab(dist::fit_empirical(est), cost + tol);
}

mc::SortedOrder relaxed_sort(std::span<const mc::Channel> channels, std::span<const mc::ChannelParams> params,
                             double tol) {
  return mc::sort_channels(channels, params, tol);
}

// ------------------------------------------------------------ OnlineMcLearner

OnlineMcLearner::OnlineMcLearner(std::vector<double> costs, LearnerParams params, mc::TableOptions table)
    : costs_(std::move(costs)), params_(params), table_options_(table), estimators_(costs_.size()) {
  params_.validate();
  if (costs_.empty()) throw InvalidArgument("at least one channel is required");
  for (double c : costs_) {
    if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("sensing cost must be finite and >= 0");
  }
}

void OnlineMcLearner::initialize(std::span<const double> first_samples) {
  if (first_samples.size() != costs_.size()) throw InvalidArgument("one initial sample per channel is required");
  for (std::size_t j = 0; j < costs_.size(); ++j) estimators_[j].add(first_samples[j]);
}

std::vector<std::size_t> OnlineMcLearner::counts() const {
  std::vector<std::size_t> out(estimators_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = estimators_[j].count();
  return out;
}

void OnlineMcLearner::inject_laws(std::vector<dist::Distribution> laws) {
  if (laws.size() != costs_.size()) throw InvalidArgument("one law per channel is required");
  injected_ = std::move(laws);
}

double OnlineMcLearner::stage_tolerance(std::size_t t) const { return tolerance(params_, static_cast<double>(t)); }

std::vector<mc::Channel> OnlineMcLearner::current_channels() const {
  std::vector<mc::Channel> out;
  out.reserve(costs_.size());
  for (std::size_t j = 0; j < costs_.size(); ++j) {
    out.push_back({injected_ ? (*injected_)[j] : estimators_[j].distribution(), costs_[j]});
  }
  return out;
}

mc::ChannelParams OnlineMcLearner::relaxed_params(std::size_t j, std::size_t t) const {
  return relaxed_ab(estimators_.at(j), costs_.at(j), stage_tolerance(t));
}

McStageResult OnlineMcLearner::stage(std::size_t t, std::span<const double> realizations) {
  const std::vector<std::size_t> due = exploration_due(counts(), static_cast<double>(t), params_);
  if (!due.empty()) {
    ++explorations_;
    return explore(due, realizations);
  }
  return exploit(t, realizations);
}

McStageResult OnlineMcLearner::explore(std::span<const std::size_t> channels, std::span<const double> realizations) {
  if (realizations.size() != costs_.size()) throw InvalidArgument("one realization per channel is required");
  if (channels.empty()) throw InvalidArgument("exploration needs at least one channel");
  McStageResult out;
  out.phase = Phase::explore;
  double best = -std::numeric_limits<double>::infinity();
  double cost = 0.0;
  for (std::size_t j : channels) {
    const double v = realizations[j];
    estimators_[j].add(v);
    cost += costs_[j];
    best = std::max(best, v);
    out.probed.push_back(j);
  }
  out.net_reward = best - cost;
  return out;
}

McStageResult OnlineMcLearner::exploit(std::size_t t, std::span<const double> realizations) {
  if (realizations.size() != costs_.size()) throw InvalidArgument("one realization per channel is required");
  McStageResult out;
  out.phase = Phase::exploit;
  try {
    const double tol = stage_tolerance(t);
    const std::vector<mc::Channel> chans = current_channels();
    std::vector<mc::ChannelParams> exact;
    std::vector<mc::ChannelParams> relaxed;
    exact.reserve(chans.size());
    relaxed.reserve(chans.size());
    for (const mc::Channel& ch : chans) {
      exact.push_back(mc::compute_ab(ch));
      relaxed.push_back(mc::compute_ab(ch.dist, ch.cost + tol));
    }
    const mc::SortedOrder order = relaxed_sort(chans, relaxed, tol);
    // Atomic laws give an exact table whose curves are built on demand.
    const bool atomic = std::all_of(chans.begin(), chans.end(), [](const mc::Channel& c) { return c.dist.is_atomic(); });
    std::shared_ptr<const mc::ValueTable> table =
        atomic ? std::make_shared<const mc::ValueTable>(chans, exact, table_options_)
               : mc::build_value_table(chans, exact, table_options_);
    mc::EpisodeResult ep = mc::simulate_mc_episode(chans, order, *table, realizations);
    for (const mc::TraceStep& step : ep.trace) {
      if (const auto* p = std::get_if<mc::Probe>(&step.decision)) {
        estimators_[p->channel].add(*step.revealed);
        out.probed.push_back(p->channel);
      }
    }
    out.net_reward = ep.net_reward;
    out.episode = std::move(ep);
    return out;
  } catch (const Error&) {
    std::vector<std::size_t> all(costs_.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    ++forced_;
    McStageResult forced = explore(all, realizations);
    forced.forced = true;
    return forced;
  }
}

// ------------------------------------------------------------ OnlineMuLearner

OnlineMuLearner::OnlineMuLearner(mu::MuConfig cfg, LearnerParams params, bool pool_samples)
    : cfg_(std::move(cfg)), params_(params), pool_(pool_samples) {
  cfg_.validate();
  params_.validate();
  ps_ = mu::success_probability(cfg_.attempt_probs);
  estimators_.resize(pool_ ? 1 : cfg_.users());
  observed_.assign(cfg_.users(), 0);
}

dist::EmpiricalEstimator& OnlineMuLearner::samples_of(std::size_t user) { return estimators_[pool_ ? 0 : user]; }

const dist::EmpiricalEstimator& OnlineMuLearner::estimator(std::size_t user) const {
  return estimators_.at(pool_ ? 0 : user);
}

void OnlineMuLearner::initialize(std::span<const double> first_samples) {
  if (first_samples.size() != cfg_.users()) throw InvalidArgument("one initial sample per user is required");
  for (std::size_t i = 0; i < first_samples.size(); ++i) {
    samples_of(i).add(first_samples[i]);
    ++observed_[i];
  }
}

std::vector<std::size_t> OnlineMuLearner::counts() const { return observed_; }

void OnlineMuLearner::inject_law(dist::Distribution law) { injected_ = std::move(law); }

double OnlineMuLearner::threshold(std::size_t user) const {
  if (injected_) return mu::solve_threshold(*injected_, cfg_.zeta, ps_, cfg_.K);
  return estimator(user).tail_fixed_point(cfg_.zeta / (ps_ * cfg_.K));
}

MuStageResult OnlineMuLearner::stage(std::size_t l, mu::ContentionStream& stream) {
  MuStageResult out;
  const std::vector<std::size_t> due = exploration_due(observed_, static_cast<double>(l), params_);
  auto record = [&](const mu::Contention& c) {
    samples_of(c.winner).add(c.quality);
    ++observed_[c.winner];
  };
  if (!due.empty()) {
    ++explorations_;
    out.phase = Phase::explore;
    std::vector<bool> eligible(cfg_.users(), false);
    for (std::size_t j : due) eligible[j] = true;
    out.record = mu::run_episode(stream, cfg_.K, cfg_.contention_cap, [&](const mu::Contention& c, std::size_t) {
      record(c);
      return static_cast<bool>(eligible[c.winner]);
    });
  } else {
    out.phase = Phase::exploit;
    // Thresholds are fixed for the stage once a user first decides.
    std::vector<std::optional<double>> thresholds(cfg_.users());
    out.record = mu::run_episode(stream, cfg_.K, cfg_.contention_cap, [&](const mu::Contention& c, std::size_t) {
      auto& thr = thresholds[c.winner];
      if (!thr) thr = threshold(c.winner);
      record(c);
      return c.quality >= *thr;
    });
  }
  out.rate = out.record.rate;
  return out;
}

}  // namespace osr::online
