#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace osr::numeric {

/// Boundary of a monotone predicate on [lo, hi]: given pred(lo) == false and
/// pred(hi) == true, shrinks the bracket until the endpoints are adjacent
/// doubles (or `width` is reached) and returns the `true` endpoint.
template <class Pred>
double first_true(Pred&& pred, double lo, double hi, double width = 0.0) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi || hi - lo <= width) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Mirror of first_true: pred(lo) == true, pred(hi) == false; returns the
/// largest `true` endpoint.
template <class Pred>
double last_true(Pred&& pred, double lo, double hi, double width = 0.0) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi || hi - lo <= width) break;
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

/// Continuous piecewise-linear function given by strictly increasing knots.
/// Outside [front, back] it extends with the slope of the end segment.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;

  /// Slope of the segment immediately to the right of x.
  double right_slope(double x) const;

  std::span<const double> knots() const noexcept { return xs_; }
  std::span<const double> values() const noexcept { return ys_; }
  std::size_t size() const noexcept { return xs_.size(); }
  bool empty() const noexcept { return xs_.empty(); }
  double front() const { return xs_.front(); }
  double back() const { return xs_.back(); }

  /// Smallest x in [front, back] with f(x) >= level, assuming f is
  /// nondecreasing there. Exact on the linear pieces. Returns back() if the
  /// level is never reached.
  double first_reaching(double level) const;

 private:
  std::size_t segment(double x) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Pointwise max of f and g over the union of their knots, with the exact
/// crossing points of the linear pieces inserted as knots.
PiecewiseLinear upper_envelope(const PiecewiseLinear& f, const PiecewiseLinear& g);

/// Pointwise max of f and the line slope * x + intercept on f's domain.
PiecewiseLinear max_with_line(const PiecewiseLinear& f, double slope, double intercept);

/// Sorted union of two sorted sequences with near-duplicates (relative 1e-14)
/// collapsed.
std::vector<double> merge_knots(std::span<const double> a, std::span<const double> b);

}  // namespace osr::numeric
