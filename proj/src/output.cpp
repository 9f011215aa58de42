#include "osr/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "osr/error.hpp"

namespace osr::harness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<AggregateTrace> aggregate(const ExperimentResult& result) {
  if (result.policies.empty()) throw InvalidArgument("no policies to emit");
  if (result.replications.empty()) throw InvalidArgument("no replications to emit");
  std::vector<AggregateTrace> out;
  const double reps = static_cast<double>(result.replications.size());
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    AggregateTrace agg;
    agg.policy = result.policies[p];
    const std::size_t T = result.replications.front().traces.at(p).stages();
    agg.reward.assign(T, 0.0);
    agg.oracle_reward.assign(T, 0.0);
    agg.phase.assign(T, "");
    for (const auto& rep : result.replications) {
      const RegretTrace& tr = rep.traces.at(p);
      if (tr.policy != agg.policy || tr.stages() != T) throw InvalidArgument("inconsistent traces for " + agg.policy);
      for (std::size_t t = 0; t < T; ++t) {
        agg.reward[t] += tr.reward[t];
        agg.oracle_reward[t] += tr.oracle_reward[t];
        const std::string tag = to_string(tr.tag[t]);
        if (agg.phase[t].empty()) {
          agg.phase[t] = tag;
        } else if (agg.phase[t] != tag) {
          agg.phase[t] = "mixed";
        }
      }
    }
    agg.cum_regret.resize(T);
    agg.avg_regret.resize(T);
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      agg.reward[t] /= reps;
      agg.oracle_reward[t] /= reps;
      acc += agg.oracle_reward[t] - agg.reward[t];
      agg.cum_regret[t] = acc;
      agg.avg_regret[t] = acc / static_cast<double>(t + 1);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::string trace_csv(const std::vector<AggregateTrace>& traces) {
  if (traces.empty()) throw InvalidArgument("no policies to emit");
  std::ostringstream os;
  os << kTraceHeader << '\n';
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.reward.size(); ++t) {
      os << (t + 1) << ',' << tr.phase[t] << ',' << tr.policy << ',' << format_double(tr.reward[t]) << ','
         << format_double(tr.oracle_reward[t]) << ',' << format_double(tr.cum_regret[t]) << ','
         << format_double(tr.avg_regret[t]) << '\n';
    }
  }
  return os.str();
}

std::string summary_csv(const ExperimentResult& result) {
  if (result.policies.empty()) throw InvalidArgument("no policies to emit");
  std::ostringstream os;
  os << "policy,replications,stages,mean_reward,stderr_reward,mean_oracle_reward,final_cum_regret,final_avg_regret,"
        "mean_exploration_stages\n";
  const double n = static_cast<double>(result.replications.size());
  double explore = 0.0;
  for (const auto& rep : result.replications) explore += static_cast<double>(rep.exploration_stages);
  explore /= n;
  for (std::size_t p = 0; p < result.policies.size(); ++p) {
    std::vector<double> per_rep;
    double oracle = 0.0;
    double regret = 0.0;
    std::size_t T = 0;
    for (const auto& rep : result.replications) {
      const RegretTrace& tr = rep.traces.at(p);
      T = tr.stages();
      double s = 0.0;
      double o = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        s += tr.reward[t];
        o += tr.oracle_reward[t];
      }
      per_rep.push_back(s / static_cast<double>(T));
      oracle += o / static_cast<double>(T);
      regret += o - s;
    }
    double mean = 0.0;
    for (double v : per_rep) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : per_rep) ss += (v - mean) * (v - mean);
    const double se = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    regret /= n;
    const bool learner = result.policies[p].rfind("online", 0) == 0;
    os << result.policies[p] << ',' << result.replications.size() << ',' << T << ',' << format_double(mean) << ','
       << format_double(se) << ',' << format_double(oracle / n) << ',' << format_double(regret) << ','
       << format_double(regret / static_cast<double>(T)) << ',' << (learner ? format_double(explore) : "") << '\n';
  }
  return os.str();
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os << "L,z,replications,mean_reward,stderr_reward\n";
  for (const auto& c : cells) {
    os << format_double(c.L) << ',' << format_double(c.z) << ',' << c.per_replication.size() << ','
       << format_double(c.mean) << ',' << format_double(c.stderr_) << '\n';
  }
  return os.str();
}

namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (stage, avg_regret)
};

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string render_svg(const std::vector<Series>& series) {
  if (series.empty()) throw InvalidArgument("no policies to plot");
  const double W = 800, H = 500, left = 70, right = 180, top = 30, bottom = 50;
  double tmax = 1.0, ymin = 0.0, ymax = 0.0;
  for (const auto& s : series) {
    for (const auto& [t, y] : s.points) {
      tmax = std::max(tmax, t);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double lx = std::log10(std::max(tmax, 10.0));
  auto px = [&](double t) { return left + (W - left - right) * std::log10(std::max(t, 1.0)) / lx; };
  auto py = [&](double y) { return top + (H - top - bottom) * (ymax - y) / (ymax - ymin); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<g stroke=\"#888\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
     << "\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double d = 1.0; d <= std::max(tmax, 10.0) * 1.0001; d *= 10.0) {
    os << "<text x=\"" << fmt(px(d)) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">" << fmt(d)
       << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(y) + 4) << "\" text-anchor=\"end\">" << fmt(y, 3)
       << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">stage</text>\n";
  os << "<text x=\"16\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (top + H - bottom) / 2 << ")\">average regret</text>\n";
  os << "</g>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % (sizeof colors / sizeof *colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin long series to a few thousand vertices; log-x compresses the tail anyway.
    const std::size_t n = series[i].points.size();
    const std::size_t step = std::max<std::size_t>(1, n / 2000);
    for (std::size_t k = 0; k < n; k += step) {
      const auto& [t, y] = series[i].points[k];
      os << fmt(px(t), 6) << ',' << fmt(py(y), 6) << ' ';
    }
    if (n > 0 && (n - 1) % step != 0) os << fmt(px(series[i].points.back().first), 6) << ','
                                         << fmt(py(series[i].points.back().second), 6);
    os << "\"/>\n";
    const double ly = top + 20.0 * static_cast<double>(i + 1);
    os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 35 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - right + 40 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[i].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string regret_svg(const std::vector<AggregateTrace>& traces) {
  std::vector<Series> series;
  for (const auto& tr : traces) {
    Series s{tr.policy, {}};
    for (std::size_t t = 0; t < tr.avg_regret.size(); ++t) s.points.emplace_back(double(t + 1), tr.avg_regret[t]);
    series.push_back(std::move(s));
  }
  return render_svg(series);
}

std::string regret_svg(const std::vector<TraceRow>& rows) {
  std::vector<Series> series;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    auto [it, inserted] = index.emplace(r.policy, series.size());
    if (inserted) series.push_back({r.policy, {}});
    series[it->second].points.emplace_back(double(r.stage), r.avg_regret);
  }
  return render_svg(series);
}

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader) throw InvalidArgument("trace CSV header mismatch");
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      TraceRow r;
      r.stage = std::stoull(f[0]);
      r.phase = f[1];
      r.policy = f[2];
      r.reward = std::stod(f[3]);
      r.oracle_reward = std::stod(f[4]);
      r.cum_regret = std::stod(f[5]);
      r.avg_regret = std::stod(f[6]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument("trace CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::string& path) { return parse_trace_csv(read_file(path)); }

void write_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) {
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError(path, ec.message());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path, "write failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

EmittedPaths emit_outputs(const ExperimentResult& result) {
  const auto traces = aggregate(result);
  const std::filesystem::path dir(result.config.output.dir);
  EmittedPaths paths;
  paths.trace = (dir / result.config.output.trace_csv).string();
  paths.summary = (dir / result.config.output.summary_csv).string();
  write_file(paths.trace, trace_csv(traces));
  write_file(paths.summary, summary_csv(result));
  if (!result.config.output.svg.empty()) {
    paths.svg = (dir / result.config.output.svg).string();
    write_file(paths.svg, regret_svg(traces));
  }
  return paths;
}

}  // namespace osr::harness
