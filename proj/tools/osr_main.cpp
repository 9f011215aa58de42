#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "osr/config.hpp"
#include "osr/error.hpp"
#include "osr/experiment.hpp"
#include "osr/output.hpp"

namespace {

using osr::harness::ExperimentConfig;

struct Overrides {
  std::string config_path;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  std::optional<double> L;
  std::optional<double> z;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("config", o.config_path, "JSON configuration file (defaults apply when omitted)");
  cmd->add_option("--horizon", o.horizon, "number of stages");
  cmd->add_option("--replications", o.replications, "number of replications");
  cmd->add_option("--seed", o.seed, "master seed (OSR_SEED overrides the file, this flag overrides both)");
  cmd->add_option("--threads", o.threads, "worker threads, 0 for one per core");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--L", o.L, "exploration scale L");
  cmd->add_option("--z", o.z, "exploration exponent z");
}

std::uint64_t parse_seed_env(const char* text) {
  try {
    std::size_t used = 0;
    const std::string s(text);
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s.find('-') != std::string::npos) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw osr::ConfigInvalid("OSR_SEED", "expected a nonnegative integer");
  }
}

ExperimentConfig resolve(const Overrides& o, std::optional<osr::harness::Model> model) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : osr::harness::load_config(o.config_path);
  if (model) cfg.model = *model;
  if (const char* env = std::getenv("OSR_SEED")) cfg.seed = parse_seed_env(env);
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.replications) cfg.replications = *o.replications;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.output.dir = *o.out;
  if (o.L) cfg.learner.L = *o.L;
  if (o.z) cfg.learner.z = *o.z;
  cfg.validate();
  return cfg;
}

int run(const ExperimentConfig& cfg) {
  const auto result = osr::harness::run_experiment(cfg);
  const auto paths = osr::harness::emit_outputs(result);
  std::cout << paths.trace << '\n' << paths.summary << '\n';
  if (!paths.svg.empty()) std::cout << paths.svg << '\n';
  std::cout << osr::harness::summary_csv(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal stopping and channel probing simulator"};
  app.require_subcommand(1);

  Overrides mu_opts, mc_opts, sweep_opts, check_opts;
  auto* run_mu = app.add_subcommand("run-mu", "simulate the contention model against its oracle");
  add_common(run_mu, mu_opts);
  auto* run_mc = app.add_subcommand("run-mc", "simulate the probing model against its oracle and baselines");
  add_common(run_mc, mc_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "average reward over a grid of L and z");
  add_common(sweep_cmd, sweep_opts);
  auto* check = app.add_subcommand("validate-config", "parse and validate a configuration file");
  check->add_option("config", check_opts.config_path, "JSON configuration file")->required();

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plot", "render an average-regret chart from a trace CSV");
  plot->add_option("trace", plot_in, "trace CSV")->required();
  plot->add_option("-o,--output", plot_out, "SVG path (default: trace path with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_mu) return run(resolve(mu_opts, osr::harness::Model::mu));
    if (*run_mc) return run(resolve(mc_opts, osr::harness::Model::mc));
    if (*sweep_cmd) {
      const ExperimentConfig cfg = resolve(sweep_opts, osr::harness::Model::mc);
      const auto cells = osr::harness::sweep(cfg);
      const std::string path = cfg.output.dir + "/" + cfg.output.sweep_csv;
      const std::string csv = osr::harness::sweep_csv(cells);
      osr::harness::write_file(path, csv);
      std::cout << path << '\n' << csv;
      return 0;
    }
    if (*check) {
      const ExperimentConfig cfg = osr::harness::load_config(check_opts.config_path);
      std::cout << "ok: model " << osr::harness::to_string(cfg.model) << ", horizon " << cfg.horizon << ", "
                << cfg.replications << " replications\n";
      return 0;
    }
    if (*plot) {
      if (plot_out.empty()) {
        plot_out = plot_in;
        const auto dot = plot_out.rfind('.');
        if (dot != std::string::npos && plot_out.find('/', dot) == std::string::npos) plot_out.resize(dot);
        plot_out += ".svg";
      }
      osr::harness::write_file(plot_out, osr::harness::regret_svg(osr::harness::read_trace_csv(plot_in)));
      std::cout << plot_out << '\n';
      return 0;
    }
  } catch (const osr::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
