#include "osr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "osr/error.hpp"

namespace osr::harness {

using nlohmann::json;

const char* to_string(Model m) noexcept { return m == Model::mu ? "mu" : "mc"; }

namespace {

/// Object reader that remembers its dotted path and rejects unknown keys.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigInvalid(display(), "expected an object");
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigInvalid(child(key), "missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigInvalid(child(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::size_t count(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigInvalid(child(key), "expected a nonnegative integer");
    return static_cast<std::size_t>(v.get<unsigned long long>());
  }
  std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : fallback; }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigInvalid(child(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigInvalid(child(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigInvalid(child(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigInvalid(child(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) {
    if (!has(key)) return fallback;
    const auto v = numbers(key);
    if (v.size() != 2 || !(v[0] <= v[1])) throw ConfigInvalid(child(key), "expected [lo, hi] with lo <= hi");
    return {v[0], v[1]};
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigInvalid(child(item.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto guarded(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const Error& e) {
    throw ConfigInvalid(field, e.what());
  }
}

dist::Distribution distribution_from(const json& j, const std::string& path) {
  Node n(j, path);
  const std::string kind = n.text("kind", "");
  dist::Distribution d = guarded(path, [&]() -> dist::Distribution {
    if (kind == "exponential") {
      if (n.has("rate") == n.has("mean")) throw ConfigInvalid(n.child("rate"), "give exactly one of rate or mean");
      if (n.has("rate")) return dist::Distribution::exponential(n.number("rate"));
      const double mean = n.number("mean");
      if (!(mean > 0.0)) throw ConfigInvalid(n.child("mean"), "must be positive");
      return dist::Distribution::exponential(1.0 / mean);
    }
    if (kind == "uniform") return dist::Distribution::uniform(n.number("lo"), n.number("hi"));
    if (kind == "discrete") return dist::Distribution::discrete(n.numbers("values"), n.numbers("probs"));
    if (kind == "empirical") return dist::Distribution::empirical(n.numbers("samples"));
    throw ConfigInvalid(n.child("kind"), "expected exponential, uniform, discrete or empirical");
  });
  n.finish();
  return d;
}

GeneratorSpec generator_from(const json& j, const std::string& path) {
  Node n(j, path);
  GeneratorSpec g;
  g.units = n.count("units", g.units);
  const std::string param = n.text("param", "mean");
  if (param != "mean" && param != "rate") throw ConfigInvalid(n.child("param"), "expected mean or rate");
  g.param_is_mean = param == "mean";
  std::tie(g.param_lo, g.param_hi) = n.range("param_range", {g.param_lo, g.param_hi});
  std::tie(g.cost_lo, g.cost_hi) = n.range("cost_range", {g.cost_lo, g.cost_hi});
  std::tie(g.attempt_lo, g.attempt_hi) = n.range("attempt_range", {g.attempt_lo, g.attempt_hi});
  g.zeta = n.number("zeta", g.zeta);
  g.K = n.number("K", g.K);
  n.finish();
  return g;
}

InstanceSpec instance_from(const json& j, const std::string& path) {
  Node n(j, path);
  InstanceSpec out;
  if (n.has("generator")) {
    out = generator_from(n.raw("generator"), n.child("generator"));
  } else if (n.has("channels")) {
    const json& arr = n.raw("channels");
    if (!arr.is_array() || arr.empty()) throw ConfigInvalid(n.child("channels"), "expected a nonempty array");
    std::vector<mc::Channel> chans;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = n.child("channels") + "[" + std::to_string(i) + "]";
      Node c(arr[i], p);
      mc::Channel ch{distribution_from(c.raw("channel"), c.child("channel")), c.number("cost")};
      guarded(c.child("cost"), [&] {
        mc::validate(ch);
        return 0;
      });
      c.finish();
      chans.push_back(std::move(ch));
    }
    out = std::move(chans);
  } else if (n.has("attempt_probs")) {
    mu::MuConfig cfg;
    cfg.attempt_probs = n.numbers("attempt_probs");
    if (n.has("users") && n.count("users") != cfg.attempt_probs.size()) {
      throw ConfigInvalid(n.child("users"), "must equal the number of attempt probabilities");
    }
    cfg.zeta = n.number("zeta", cfg.zeta);
    cfg.K = n.number("K", cfg.K);
    cfg.channel = distribution_from(n.raw("channel"), n.child("channel"));
    cfg.contention_cap = n.count("contention_cap", cfg.contention_cap);
    guarded(path, [&] {
      cfg.validate();
      return 0;
    });
    out = std::move(cfg);
  } else {
    throw ConfigInvalid(path, "expected one of generator, channels or attempt_probs");
  }
  n.finish();
  return out;
}

online::LearnerParams learner_from(const json& j, const std::string& path) {
  Node n(j, path);
  online::LearnerParams p;
  p.L = n.number("L", p.L);
  p.z = n.number("z", p.z);
  if (n.has("alpha")) {
    if (n.has("z") && j.contains("z")) throw ConfigInvalid(n.child("alpha"), "give z or alpha, not both");
    p.z = guarded(n.child("alpha"), [&] { return online::balanced_z(n.number("alpha")); });
  }
  const std::string base = n.text("log_base", "e");
  if (base == "e") {
    p.log_base = online::LogBase::e;
  } else if (base == "10") {
    p.log_base = online::LogBase::ten;
  } else {
    throw ConfigInvalid(n.child("log_base"), "expected \"e\" or \"10\"");
  }
  const std::string mode = n.text("mode", "standard");
  if (mode == "standard") {
    p.mode = online::Mode::standard;
  } else if (mode == "adaptive") {
    p.mode = online::Mode::adaptive;
  } else {
    throw ConfigInvalid(n.child("mode"), "expected standard or adaptive");
  }
  p.theta = n.number("theta", p.theta);
  n.finish();
  guarded(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon < 1) throw ConfigInvalid("horizon", "must be >= 1");
  if (replications < 1) throw ConfigInvalid("replications", "must be >= 1");
  guarded("learner", [&] {
    learner.validate();
    return 0;
  });
  if (table.grid_size < 64) throw ConfigInvalid("table.grid_size", "must be >= 64");
  if (table.max_grid_size < table.grid_size) throw ConfigInvalid("table.max_grid_size", "must be >= grid_size");
  if (!(table.refine_tolerance > 0.0)) throw ConfigInvalid("table.tolerance", "must be positive");
  for (const auto& b : baselines) {
    if (b != "ucb1" && b != "best_single" && b != "random") {
      throw ConfigInvalid("baselines", "unknown baseline '" + b + "'");
    }
  }
  for (double L : sweep.L) {
    if (!(L > 0.0)) throw ConfigInvalid("sweep.L", "values must be positive");
  }
  for (double z : sweep.z) {
    if (!(z > 0.0 && z < 1.0)) throw ConfigInvalid("sweep.z", "values must lie in (0, 1)");
  }
  for (std::size_t t : snapshot_stages) {
    if (t < 1 || t > horizon) throw ConfigInvalid("snapshot_stages", "stages must lie in [1, horizon]");
  }
  if (const auto* g = std::get_if<GeneratorSpec>(&instance)) {
    const std::string p = "instance.generator";
    if (g->units < 1 || g->units > mc::kMaxChannels) throw ConfigInvalid(p + ".units", "must lie in [1, 20]");
    if (!(g->param_lo >= 0.0) || !(g->param_hi > 0.0)) throw ConfigInvalid(p + ".param_range", "must be nonnegative with hi > 0");
    if (!(g->cost_lo >= 0.0)) throw ConfigInvalid(p + ".cost_range", "costs must be >= 0");
    if (!(g->attempt_lo >= 0.0 && g->attempt_hi <= 1.0 && g->attempt_hi > 0.0)) {
      throw ConfigInvalid(p + ".attempt_range", "must lie in [0, 1] with hi > 0");
    }
    if (!(g->zeta > 0.0)) throw ConfigInvalid(p + ".zeta", "must be positive");
    if (!(g->K > 0.0)) throw ConfigInvalid(p + ".K", "must be positive");
  } else if (model == Model::mc && !std::holds_alternative<std::vector<mc::Channel>>(instance)) {
    throw ConfigInvalid("instance", "model mc needs a channel list or a generator");
  } else if (model == Model::mu && !std::holds_alternative<mu::MuConfig>(instance)) {
    throw ConfigInvalid("instance", "model mu needs attempt_probs/channel or a generator");
  }
  if (const auto* chans = std::get_if<std::vector<mc::Channel>>(&instance)) {
    if (chans->size() > mc::kMaxChannels) throw ConfigInvalid("instance.channels", "at most 20 channels");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigInvalid("<root>", std::string("malformed JSON: ") + e.what());
  }
  Node n(j, "");
  ExperimentConfig cfg;
  const std::string model = n.text("model", "mc");
  if (model == "mc") {
    cfg.model = Model::mc;
  } else if (model == "mu") {
    cfg.model = Model::mu;
  } else {
    throw ConfigInvalid("model", "expected mc or mu");
  }
  cfg.horizon = n.count("horizon", cfg.horizon);
  cfg.replications = n.count("replications", cfg.replications);
  if (n.has("seed")) {
    const json& s = n.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigInvalid("seed", "expected a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.threads = n.count("threads", cfg.threads);
  if (n.has("instance")) cfg.instance = instance_from(n.raw("instance"), "instance");
  if (n.has("learner")) cfg.learner = learner_from(n.raw("learner"), "learner");
  if (n.has("baselines")) {
    const json& b = n.raw("baselines");
    if (!b.is_array()) throw ConfigInvalid("baselines", "expected an array of names");
    cfg.baselines.clear();
    for (const auto& item : b) {
      if (!item.is_string()) throw ConfigInvalid("baselines", "expected an array of names");
      cfg.baselines.push_back(item.get<std::string>());
    }
  }
  cfg.ucb1_gross_rewards = n.flag("ucb1_gross_rewards", cfg.ucb1_gross_rewards);
  cfg.pool_samples = n.flag("pool_samples", cfg.pool_samples);
  if (n.has("table")) {
    Node t(n.raw("table"), "table");
    cfg.table.grid_size = t.count("grid_size", cfg.table.grid_size);
    cfg.table.max_grid_size = t.count("max_grid_size", std::max(cfg.table.max_grid_size, cfg.table.grid_size));
    cfg.table.refine_tolerance = t.number("tolerance", cfg.table.refine_tolerance);
    t.finish();
  }
  if (n.has("sweep")) {
    Node s(n.raw("sweep"), "sweep");
    if (s.has("L")) cfg.sweep.L = s.numbers("L");
    if (s.has("z")) cfg.sweep.z = s.numbers("z");
    s.finish();
  }
  if (n.has("snapshot_stages")) {
    const json& a = n.raw("snapshot_stages");
    if (!a.is_array()) throw ConfigInvalid("snapshot_stages", "expected an array of stages");
    for (const auto& item : a) {
      if (!item.is_number_unsigned()) throw ConfigInvalid("snapshot_stages", "expected positive integers");
      cfg.snapshot_stages.push_back(item.get<std::size_t>());
    }
  }
  if (n.has("output")) {
    Node o(n.raw("output"), "output");
    cfg.output.dir = o.text("dir", cfg.output.dir);
    cfg.output.trace_csv = o.text("trace_csv", cfg.output.trace_csv);
    cfg.output.summary_csv = o.text("summary_csv", cfg.output.summary_csv);
    cfg.output.svg = o.text("svg", cfg.output.svg);
    cfg.output.sweep_csv = o.text("sweep_csv", cfg.output.sweep_csv);
    o.finish();
  }
  n.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

dist::Distribution parse_distribution(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigInvalid("<root>", std::string("malformed JSON: ") + e.what());
  }
  return distribution_from(j, "channel");
}

}  // namespace osr::harness
