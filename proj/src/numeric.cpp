#include "osr/numeric.hpp"

#include <algorithm>

#include "osr/error.hpp"

namespace osr::numeric {

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.empty()) {
    throw InvalidArgument("piecewise-linear function needs matching, nonempty knots");
  }
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1])) throw InvalidArgument("knots must be strictly increasing");
  }
}

std::size_t PiecewiseLinear::segment(double x) const {
  // Index i of the segment [xs[i], xs[i+1]] used for x; clamps to the ends.
  if (xs_.size() < 2) return 0;
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
  return std::min(i, xs_.size() - 2);
}

double PiecewiseLinear::operator()(double x) const {
  if (xs_.size() == 1) return ys_[0];
  const std::size_t i = segment(x);
  const double x0 = xs_[i], x1 = xs_[i + 1];
  if (x == x0) return ys_[i];
  if (x == x1) return ys_[i + 1];
  const double t = (x - x0) / (x1 - x0);
  return ys_[i] + t * (ys_[i + 1] - ys_[i]);
}

double PiecewiseLinear::right_slope(double x) const {
  if (xs_.size() == 1) return 0.0;
  std::size_t i = segment(x);
  if (x >= xs_[i + 1] && i + 2 < xs_.size()) ++i;
  return (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
}

double PiecewiseLinear::first_reaching(double level) const {
  auto it = std::partition_point(ys_.begin(), ys_.end(), [&](double y) { return y < level; });
  if (it == ys_.end()) return xs_.back();
  const std::size_t i = static_cast<std::size_t>(it - ys_.begin());
  if (i == 0) return xs_.front();
  const double y0 = ys_[i - 1], y1 = ys_[i];
  const double x0 = xs_[i - 1], x1 = xs_[i];
  const double t = (level - y0) / (y1 - y0);
  return std::clamp(x0 + t * (x1 - x0), x0, x1);
}

std::vector<double> merge_knots(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::vector<double> unique;
  unique.reserve(out.size());
  for (double x : out) {
    if (!unique.empty() && x - unique.back() <= 1e-14 * std::max(1.0, std::abs(x))) continue;
    unique.push_back(x);
  }
  return unique;
}

namespace {

template <class G>
PiecewiseLinear envelope_impl(const PiecewiseLinear& f, std::span<const double> extra, G&& g) {
  const std::vector<double> xs = merge_knots(f.knots(), extra);
  std::vector<double> out_x;
  std::vector<double> out_y;
  out_x.reserve(xs.size() + 8);
  out_y.reserve(xs.size() + 8);
  double prev_x = 0.0, prev_d = 0.0, prev_f = 0.0, prev_g = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double fx = f(x);
    const double gx = g(x);
    const double d = fx - gx;
    if (i > 0 && ((prev_d > 0.0 && d < 0.0) || (prev_d < 0.0 && d > 0.0))) {
      const double t = prev_d / (prev_d - d);
      const double xc = prev_x + t * (x - prev_x);
      if (xc > prev_x && xc < x) {
        out_x.push_back(xc);
        out_y.push_back(std::max(prev_f + t * (fx - prev_f), prev_g + t * (gx - prev_g)));
      }
    }
    out_x.push_back(x);
    out_y.push_back(std::max(fx, gx));
    prev_x = x;
    prev_d = d;
    prev_f = fx;
    prev_g = gx;
  }
  return PiecewiseLinear(std::move(out_x), std::move(out_y));
}

}  // namespace

PiecewiseLinear upper_envelope(const PiecewiseLinear& f, const PiecewiseLinear& g) {
  return envelope_impl(f, g.knots(), [&](double x) { return g(x); });
}

PiecewiseLinear max_with_line(const PiecewiseLinear& f, double slope, double intercept) {
  return envelope_impl(f, {}, [=](double x) { return slope * x + intercept; });
}

}  // namespace osr::numeric
