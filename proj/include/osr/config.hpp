#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "osr/mc.hpp"
#include "osr/mu.hpp"
#include "osr/online.hpp"
#include "osr/value_table.hpp"

namespace osr::harness {

enum class Model { mu, mc };
const char* to_string(Model m) noexcept;

/// Random instance family: channel laws are exponential with a parameter
/// drawn uniformly from `param_range`, read as the mean (default) or as the
/// rate; costs and attempt probabilities are uniform on their ranges.
struct GeneratorSpec {
  std::size_t units = 5;
  bool param_is_mean = true;
  double param_lo = 0.0;
  double param_hi = 0.5;
  double cost_lo = 0.0;
  double cost_hi = 0.1;
  double attempt_lo = 0.0;
  double attempt_hi = 0.5;
  double zeta = 1.0;
  double K = 10.0;
};

using InstanceSpec = std::variant<GeneratorSpec, std::vector<mc::Channel>, mu::MuConfig>;

struct SweepSpec {
  std::vector<double> L;
  std::vector<double> z;
};

struct OutputSpec {
  std::string dir = "results";
  std::string trace_csv = "trace.csv";
  std::string summary_csv = "summary.csv";
  std::string svg = "regret.svg";
  std::string sweep_csv = "sweep.csv";
};

struct ExperimentConfig {
  Model model = Model::mc;
  std::size_t horizon = 4000;
  std::size_t replications = 50;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: one per hardware thread
  InstanceSpec instance = GeneratorSpec{};
  online::LearnerParams learner;
  std::vector<std::string> baselines{"ucb1", "best_single", "random"};
  bool ucb1_gross_rewards = false;
  bool pool_samples = false;
  mc::TableOptions table;
  SweepSpec sweep;
  std::vector<std::size_t> snapshot_stages;
  OutputSpec output;

  /// Throws ConfigInvalid naming the offending field.
  void validate() const;
};

/// Parses the JSON text of a configuration document. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Channel law from a tagged object such as {"kind":"exponential","rate":0.4}.
dist::Distribution parse_distribution(const std::string& json_text);

}  // namespace osr::harness
