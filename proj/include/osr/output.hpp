#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "osr/experiment.hpp"

namespace osr::harness {

/// Replication-averaged trace of one policy.
struct AggregateTrace {
  std::string policy;
  std::vector<std::string> phase;  // explore, exploit, oracle, or mixed when replications disagree
  std::vector<double> reward;
  std::vector<double> oracle_reward;
  std::vector<double> cum_regret;
  std::vector<double> avg_regret;
};

std::vector<AggregateTrace> aggregate(const ExperimentResult& result);

/// One parsed row of a trace CSV.
struct TraceRow {
  std::size_t stage = 0;
  std::string phase;
  std::string policy;
  double reward = 0.0;
  double oracle_reward = 0.0;
  double cum_regret = 0.0;
  double avg_regret = 0.0;
};

inline constexpr const char* kTraceHeader = "stage,phase,policy,reward,oracle_reward,cum_regret,avg_regret";

/// Renders numbers with %.17g so a re-read yields the same doubles.
std::string format_double(double v);

std::string trace_csv(const std::vector<AggregateTrace>& traces);
std::string summary_csv(const ExperimentResult& result);
std::string sweep_csv(const std::vector<SweepCell>& cells);
/// Log-x line chart of avg_regret per policy.
std::string regret_svg(const std::vector<AggregateTrace>& traces);
std::string regret_svg(const std::vector<TraceRow>& rows);

std::vector<TraceRow> parse_trace_csv(const std::string& text);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

struct EmittedPaths {
  std::string trace;
  std::string summary;
  std::string svg;
};

/// Trace CSV, summary CSV and SVG under cfg.output.dir. Empty svg name skips the chart.
EmittedPaths emit_outputs(const ExperimentResult& result);

}  // namespace osr::harness
