#include "osr/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "osr/baselines.hpp"
#include "osr/error.hpp"
#include "osr/online.hpp"
#include "osr/policy.hpp"
#include "osr/rng.hpp"

namespace osr::harness {

namespace {

enum Purpose : std::uint64_t {
  kInstance = 1,
  kRealization = 2,
  kRandomBaseline = 3,
  kContention = 4,
  kMuInit = 5,
};

double draw_in(StreamRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

/// Exponential law whose parameter lies in (lo, hi].
dist::Distribution draw_exponential(StreamRng& rng, const GeneratorSpec& g) {
  const double param = g.param_lo + (g.param_hi - g.param_lo) * (1.0 - rng.uniform01());
  return dist::Distribution::exponential(g.param_is_mean ? 1.0 / param : param);
}

}  // namespace

const char* to_string(StageTag t) noexcept {
  switch (t) {
    case StageTag::explore:
      return "explore";
    case StageTag::exploit:
      return "exploit";
    case StageTag::oracle:
      return "oracle";
  }
  return "exploit";
}

std::vector<double> RegretTrace::cumulative_regret() const {
  std::vector<double> out(reward.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < reward.size(); ++t) {
    acc += oracle_reward[t] - reward[t];
    out[t] = acc;
  }
  return out;
}

std::vector<std::string> policy_names(const ExperimentConfig& cfg) {
  if (cfg.model == Model::mu) return {"offline_mu", "online_mu"};
  std::vector<std::string> out{"offline_mc", "online_mc"};
  for (const auto& b : cfg.baselines) out.push_back(b);
  return out;
}

std::vector<mc::Channel> mc_instance(const ExperimentConfig& cfg, std::size_t r) {
  if (const auto* chans = std::get_if<std::vector<mc::Channel>>(&cfg.instance)) return *chans;
  const auto* g = std::get_if<GeneratorSpec>(&cfg.instance);
  if (g == nullptr) throw InvalidArgument("configuration holds no multichannel instance");
  StreamRng rng(stream_key(cfg.seed, {r, kInstance}));
  std::vector<mc::Channel> out;
  for (std::size_t j = 0; j < g->units; ++j) {
    dist::Distribution d = draw_exponential(rng, *g);
    const double c = draw_in(rng, g->cost_lo, g->cost_hi);
    out.push_back({std::move(d), c});
  }
  return out;
}

mu::MuConfig mu_instance(const ExperimentConfig& cfg, std::size_t r) {
  if (const auto* m = std::get_if<mu::MuConfig>(&cfg.instance)) return *m;
  const auto* g = std::get_if<GeneratorSpec>(&cfg.instance);
  if (g == nullptr) throw InvalidArgument("configuration holds no multiuser instance");
  StreamRng rng(stream_key(cfg.seed, {r, kInstance}));
  mu::MuConfig out;
  out.channel = draw_exponential(rng, *g);
  for (std::size_t i = 0; i < g->units; ++i) {
    out.attempt_probs.push_back(g->attempt_lo + (g->attempt_hi - g->attempt_lo) * (1.0 - rng.uniform01()));
  }
  out.zeta = g->zeta;
  out.K = g->K;
  out.validate();
  return out;
}

std::vector<std::vector<double>> mc_realizations(const ExperimentConfig& cfg, std::size_t r,
                                                 std::span<const mc::Channel> channels) {
  std::vector<std::vector<double>> x(cfg.horizon + 1, std::vector<double>(channels.size()));
  for (std::size_t j = 0; j < channels.size(); ++j) {
    StreamRng rng(stream_key(cfg.seed, {r, kRealization, j}));
    for (std::size_t t = 0; t <= cfg.horizon; ++t) x[t][j] = channels[j].dist.sample(rng);
  }
  return x;
}

std::uint64_t mu_stage_key(const ExperimentConfig& cfg, std::size_t r, std::size_t l) {
  return stream_key(cfg.seed, {r, kContention, l});
}

namespace {

RegretTrace make_trace(const std::string& name, std::size_t T) {
  RegretTrace tr;
  tr.policy = name;
  tr.reward.reserve(T);
  tr.oracle_reward.reserve(T);
  tr.tag.reserve(T);
  return tr;
}

ReplicationResult run_mc(const ExperimentConfig& cfg, std::size_t r) {
  const std::size_t T = cfg.horizon;
  const std::vector<mc::Channel> chans = mc_instance(cfg, r);
  const std::size_t n = chans.size();
  const auto x = mc_realizations(cfg, r, chans);

  ReplicationResult out;
  out.replication = r;
  out.units = n;

  // Offline oracle.
  const mc::SortedOrder order = mc::sort_channels(chans);
  const auto table = mc::build_value_table(chans, order.params, cfg.table);
  std::vector<double> oracle(T + 1, 0.0);
  RegretTrace off = make_trace("offline_mc", T);
  for (std::size_t t = 1; t <= T; ++t) {
    oracle[t] = mc::simulate_mc_episode(chans, order, *table, x[t]).net_reward;
    off.reward.push_back(oracle[t]);
    off.oracle_reward.push_back(oracle[t]);
    off.tag.push_back(StageTag::oracle);
  }
  out.traces.push_back(std::move(off));

  // Online learner.
  std::vector<double> costs;
  for (const auto& c : chans) costs.push_back(c.cost);
  online::OnlineMcLearner learner(costs, cfg.learner, cfg.table);
  learner.initialize(x[0]);
  RegretTrace on = make_trace("online_mc", T);
  std::size_t next_snapshot = 0;
  std::vector<std::size_t> snaps = cfg.snapshot_stages;
  std::sort(snaps.begin(), snaps.end());
  for (std::size_t t = 1; t <= T; ++t) {
    while (next_snapshot < snaps.size() && snaps[next_snapshot] == t) {
      ThresholdSnapshot s;
      s.stage = t;
      for (std::size_t j = 0; j < n; ++j) {
        s.relaxed.push_back(learner.relaxed_params(j, t));
        s.exact.push_back(order.params[j]);
      }
      out.snapshots.push_back(std::move(s));
      ++next_snapshot;
    }
    const online::McStageResult res = learner.stage(t, x[t]);
    on.reward.push_back(res.net_reward);
    on.oracle_reward.push_back(oracle[t]);
    on.tag.push_back(res.phase == online::Phase::explore ? StageTag::explore : StageTag::exploit);
  }
  out.exploration_stages = learner.exploration_stages();
  out.forced_explorations = learner.forced_explorations();
  out.traces.push_back(std::move(on));

  for (const std::string& b : cfg.baselines) {
    RegretTrace tr = make_trace(b, T);
    if (b == "ucb1") {
      baselines::ArmStats stats(n);
      const double charge = cfg.ucb1_gross_rewards ? 0.0 : 1.0;
      for (std::size_t j = 0; j < n; ++j) stats.record(j, x[0][j] - charge * chans[j].cost);
      for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t arm = baselines::ucb1_select(stats, static_cast<double>(n + t - 1));
        const double rwd = x[t][arm] - charge * chans[arm].cost;
        stats.record(arm, rwd);
        tr.reward.push_back(rwd);
        tr.oracle_reward.push_back(oracle[t]);
        tr.tag.push_back(StageTag::exploit);
      }
    } else if (b == "best_single") {
      const std::size_t arm = baselines::best_single(chans);
      for (std::size_t t = 1; t <= T; ++t) {
        tr.reward.push_back(x[t][arm]);
        tr.oracle_reward.push_back(oracle[t]);
        tr.tag.push_back(StageTag::exploit);
      }
    } else if (b == "random") {
      StreamRng rng(stream_key(cfg.seed, {r, kRandomBaseline}));
      for (std::size_t t = 1; t <= T; ++t) {
        const std::size_t arm = baselines::random_select(n, rng);
        tr.reward.push_back(x[t][arm]);
        tr.oracle_reward.push_back(oracle[t]);
        tr.tag.push_back(StageTag::exploit);
      }
    } else {
      throw InvalidArgument("unknown baseline " + b);
    }
    out.traces.push_back(std::move(tr));
  }
  return out;
}

ReplicationResult run_mu(const ExperimentConfig& cfg, std::size_t r) {
  const std::size_t H = cfg.horizon;
  const mu::MuConfig inst = mu_instance(cfg, r);
  const double ps = mu::success_probability(inst.attempt_probs);
  const double x_star = mu::solve_threshold(inst.channel, inst.zeta, ps, inst.K);

  ReplicationResult out;
  out.replication = r;
  out.units = inst.users();

  online::OnlineMuLearner learner(inst, cfg.learner, cfg.pool_samples);
  {
    StreamRng rng(stream_key(cfg.seed, {r, kMuInit}));
    std::vector<double> first(inst.users());
    for (double& v : first) v = inst.channel.sample(rng);
    learner.initialize(first);
  }
  RegretTrace off = make_trace("offline_mu", H);
  RegretTrace on = make_trace("online_mu", H);
  for (std::size_t l = 1; l <= H; ++l) {
    mu::ContentionStream stream(inst, mu_stage_key(cfg, r, l));
    const double oracle = mu::threshold_episode(inst, x_star, stream).rate;
    const online::MuStageResult res = learner.stage(l, stream);
    off.reward.push_back(oracle);
    off.oracle_reward.push_back(oracle);
    off.tag.push_back(StageTag::oracle);
    on.reward.push_back(res.rate);
    on.oracle_reward.push_back(oracle);
    on.tag.push_back(res.phase == online::Phase::explore ? StageTag::explore : StageTag::exploit);
  }
  out.exploration_stages = learner.exploration_stages();
  out.traces.push_back(std::move(off));
  out.traces.push_back(std::move(on));
  return out;
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& cfg, std::size_t r) {
  return cfg.model == Model::mc ? run_mc(cfg, r) : run_mu(cfg, r);
}

std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& work) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Report the failure of the lowest index so errors do not depend on timing.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  out.config = cfg;
  out.policies = policy_names(cfg);
  out.replications.resize(cfg.replications);
  parallel_for(cfg.replications, worker_count(cfg.threads),
               [&](std::size_t r) { out.replications[r] = run_replication(cfg, r); });
  return out;
}

std::vector<SweepCell> sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.model != Model::mc) throw InvalidArgument("the parameter sweep runs the multichannel learner");
  const std::vector<double> Ls = cfg.sweep.L.empty() ? std::vector<double>{cfg.learner.L} : cfg.sweep.L;
  const std::vector<double> zs = cfg.sweep.z.empty() ? std::vector<double>{cfg.learner.z} : cfg.sweep.z;
  std::vector<SweepCell> cells;
  for (double L : Ls) {
    for (double z : zs) {
      SweepCell c;
      c.L = L;
      c.z = z;
      c.per_replication.assign(cfg.replications, 0.0);
      cells.push_back(std::move(c));
    }
  }
  const std::size_t T = cfg.horizon;
  parallel_for(cfg.replications, worker_count(cfg.threads), [&](std::size_t r) {
    const std::vector<mc::Channel> chans = mc_instance(cfg, r);
    const auto x = mc_realizations(cfg, r, chans);
    std::vector<double> costs;
    for (const auto& c : chans) costs.push_back(c.cost);
    for (SweepCell& cell : cells) {
      online::LearnerParams p = cfg.learner;
      p.L = cell.L;
      p.z = cell.z;
      online::OnlineMcLearner learner(costs, p, cfg.table);
      learner.initialize(x[0]);
      double total = 0.0;
      for (std::size_t t = 1; t <= T; ++t) total += learner.stage(t, x[t]).net_reward;
      cell.per_replication[r] = total / static_cast<double>(T);
    }
  });
  for (SweepCell& cell : cells) {
    const double n = static_cast<double>(cell.per_replication.size());
    double s = 0.0;
    for (double v : cell.per_replication) s += v;
    cell.mean = s / n;
    double ss = 0.0;
    for (double v : cell.per_replication) ss += (v - cell.mean) * (v - cell.mean);
    cell.stderr_ = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
  }
  return cells;
}

}  // namespace osr::harness
