#include "osr/value_table.hpp"

#include <algorithm>
#include <cmath>

#include "osr/error.hpp"

namespace osr::mc {

using numeric::PiecewiseLinear;

ValueTable::ValueTable(std::vector<Channel> channels, std::vector<ChannelParams> params, TableOptions options)
    : channels_(std::move(channels)), params_(std::move(params)), options_(options) {
  if (channels_.empty()) throw InvalidArgument("value table needs at least one channel");
  if (channels_.size() > kMaxChannels) throw InvalidArgument("too many channels for the subset table");
  if (params_.size() != channels_.size()) throw InvalidArgument("one parameter pair per channel is required");
  if (options_.grid_size < 64) throw InvalidArgument("grid_size must be at least 64");

  bool any_analytic = false;
  double a_max = 0.0;
  for (std::size_t j = 0; j < channels_.size(); ++j) {
    validate(channels_[j]);
    any_analytic = any_analytic || !channels_[j].dist.is_atomic();
    a_max = std::max(a_max, params_[j].a);
  }
  if (!any_analytic) return;

  // Analytic laws are interpolated between these knots.
  const std::size_t g = options_.grid_size;
  std::vector<double> pts;
  pts.reserve(2 * g + 4 * channels_.size());
  for (std::size_t i = 0; i < g; ++i) pts.push_back(a_max * static_cast<double>(i) / static_cast<double>(g - 1));
  for (std::size_t j = 0; j < channels_.size(); ++j) {
    const dist::Distribution& d = channels_[j].dist;
    pts.push_back(params_[j].a);
    pts.push_back(params_[j].b);
    if (d.is_atomic()) continue;
    const std::size_t q = std::max<std::size_t>(16, g / 4);
    for (std::size_t k = 1; k <= q; ++k) {
      const double x = d.quantile(static_cast<double>(k) / static_cast<double>(q + 1));
      if (x < a_max) pts.push_back(x);
    }
    for (double x : d.breakpoints()) {
      if (x >= 0.0 && x <= a_max) pts.push_back(x);
    }
  }
  std::sort(pts.begin(), pts.end());
  base_ = numeric::merge_knots(pts, {});
}

double ValueTable::horizon(ChannelSet s) const {
  double h = 0.0;
  for (std::size_t j = 0; j < channels_.size(); ++j) {
    if (contains(s, j)) h = std::max(h, params_[j].a);
  }
  return h;
}

double ValueTable::guess_value(ChannelSet s) const {
  double g = 0.0;
  for (std::size_t j = 0; j < channels_.size(); ++j) {
    if (contains(s, j)) g = std::max(g, channels_[j].dist.mean());
  }
  return g;
}

double ValueTable::value(double x, ChannelSet s) const {
  s &= all();
  if (s == 0 || x >= horizon(s)) return x;
  return value_curve(s)(x);
}

double ValueTable::probe_value(std::size_t j, double x, ChannelSet s) const {
  if (j >= channels_.size() || !contains(s, j)) throw InvalidArgument("probed channel is not in the set");
  s &= all();
  if (x >= horizon(s)) {
    // Every continuation stops at once: -c + E[max(x, X)].
    return -channels_[j].cost + x + channels_[j].dist.above(x);
  }
  return probe_curve(j, s)(x);
}

const PiecewiseLinear& ValueTable::value_curve(ChannelSet s) const {
  s &= all();
  auto it = values_.find(s);
  if (it != values_.end()) return it->second;
  PiecewiseLinear curve = build_value_curve(s);
  return values_.emplace(s, std::move(curve)).first->second;
}

const PiecewiseLinear& ValueTable::probe_curve(std::size_t j, ChannelSet s) const {
  s &= all();
  if (j >= channels_.size() || !contains(s, j)) throw InvalidArgument("probed channel is not in the set");
  const std::uint64_t key = (static_cast<std::uint64_t>(s) << 8) | j;
  auto it = probes_.find(key);
  if (it != probes_.end()) return it->second;
  PiecewiseLinear curve = build_probe_curve(j, s);
  return probes_.emplace(key, std::move(curve)).first->second;
}

void ValueTable::precompute() const {
  const ChannelSet full = all();
  for (ChannelSet s = 1; s <= full; ++s) {
    value_curve(s);
    for (std::size_t j = 0; j < channels_.size(); ++j) {
      if (contains(s, j)) probe_curve(j, s);
    }
  }
}

std::vector<double> ValueTable::eval_points(std::size_t j, double a_rest, double hi,
                                            const PiecewiseLinear* rest) const {
  const dist::Distribution& d = channels_[j].dist;
  std::vector<double> pts{0.0, hi};
  if (a_rest > 0.0 && a_rest < hi) pts.push_back(a_rest);
  if (const dist::AtomicLaw* law = d.atoms()) {
    const auto vals = law->values();
    const auto end = std::lower_bound(vals.begin(), vals.end(), hi);
    const auto begin = std::upper_bound(vals.begin(), end, 0.0);
    pts.insert(pts.end(), begin, end);
  } else {
    const auto end = std::lower_bound(base_.begin(), base_.end(), hi);
    pts.insert(pts.end(), base_.begin(), end);
    for (double x : d.breakpoints()) {
      if (x > 0.0 && x < hi) pts.push_back(x);
    }
  }
  std::sort(pts.begin(), pts.end());
  if (rest != nullptr) return numeric::merge_knots(numeric::merge_knots(pts, {}), rest->knots());
  return numeric::merge_knots(pts, {});
}

PiecewiseLinear ValueTable::build_probe_curve(std::size_t j, ChannelSet s) const {
  const dist::Distribution& d = channels_[j].dist;
  const double c = channels_[j].cost;
  const ChannelSet rest = without(s, j);
  const double hi = horizon(s);
  const double a_rest = horizon(rest);
  const PiecewiseLinear* vr = rest == 0 ? nullptr : &value_curve(rest);
  const std::vector<double> pts = eval_points(j, a_rest, hi, vr);

  // W(p) = F(p) V_r(p) + sum over segments above p of E[V_r(X); X in seg]
  //        + E[X; X > a_rest]. V_r is linear on every segment between
  //        consecutive points, so each piece is exact in F and E[X; X > u].
  std::vector<double> w(pts.size());
  std::size_t m = 0;  // points with p < a_rest
  while (m < pts.size() && pts[m] < a_rest) ++m;
  const double tail_part = a_rest > 0.0 ? d.upper_partial_mean(a_rest) : 0.0;
  double acc = 0.0;
  double upper_x = a_rest;
  double upper_F = d.cdf(a_rest);
  double upper_M = tail_part;
  for (std::size_t k = m; k-- > 0;) {
    const double x0 = pts[k];
    const double f0 = d.cdf(x0);
    const double m0 = d.upper_partial_mean(x0);
    const double v0 = (*vr)(x0);
    const double v1 = (*vr)(upper_x);
    const double slope = upper_x > x0 ? (v1 - v0) / (upper_x - x0) : 0.0;
    const double intercept = v0 - slope * x0;
    acc += intercept * (upper_F - f0) + slope * (m0 - upper_M);
    w[k] = f0 * v0 + acc + tail_part - c;
    upper_x = x0;
    upper_F = f0;
    upper_M = m0;
  }
  for (std::size_t k = m; k < pts.size(); ++k) w[k] = pts[k] + d.above(pts[k]) - c;
  return PiecewiseLinear(pts, std::move(w));
}

PiecewiseLinear ValueTable::build_value_curve(ChannelSet s) const {
  if (s == 0) return PiecewiseLinear({0.0, 1.0}, {0.0, 1.0});
  PiecewiseLinear env;
  bool first = true;
  for (std::size_t j = 0; j < channels_.size(); ++j) {
    if (!contains(s, j)) continue;
    const PiecewiseLinear& w = probe_curve(j, s);
    env = first ? w : numeric::upper_envelope(env, w);
    first = false;
  }
  env = numeric::max_with_line(env, 1.0, 0.0);
  return numeric::max_with_line(env, 0.0, guess_value(s));
}

namespace {

bool has_analytic(std::span<const Channel> channels) {
  return std::any_of(channels.begin(), channels.end(), [](const Channel& c) { return !c.dist.is_atomic(); });
}

}  // namespace

std::shared_ptr<const ValueTable> build_value_table(std::span<const Channel> channels,
                                                    std::span<const ChannelParams> params,
                                                    TableOptions options) {
  std::vector<Channel> ch(channels.begin(), channels.end());
  std::vector<ChannelParams> pr(params.begin(), params.end());
  auto table = std::make_shared<ValueTable>(ch, pr, options);
  table->precompute();
  if (!has_analytic(channels)) return table;

  const ChannelSet full = table->all();
  while (true) {
    const std::size_t next = 2 * options.grid_size;
    if (next > options.max_grid_size) {
      throw GridTooCoarse("value table did not settle within grid size " + std::to_string(options.max_grid_size));
    }
    options.grid_size = next;
    auto fine = std::make_shared<ValueTable>(ch, pr, options);
    fine->precompute();
    double change = 0.0;
    for (double x : table->value_curve(full).knots()) {
      change = std::max(change, std::abs(table->value(x, full) - fine->value(x, full)));
    }
    for (double x : fine->value_curve(full).knots()) {
      change = std::max(change, std::abs(table->value(x, full) - fine->value(x, full)));
    }
    table = std::move(fine);
    if (change <= options.refine_tolerance) return table;
  }
}

std::shared_ptr<const ValueTable> build_value_table(std::span<const Channel> channels, TableOptions options) {
  std::vector<ChannelParams> params;
  params.reserve(channels.size());
  for (const Channel& c : channels) params.push_back(compute_ab(c));
  return build_value_table(channels, params, options);
}

}  // namespace osr::mc
