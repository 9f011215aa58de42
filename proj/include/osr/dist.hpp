#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "osr/rng.hpp"

namespace osr::dist {

/// Tail mass cut off by the bookkeeping support bound of an exponential law
/// (the bound is its 1 - 1e-9 quantile).
inline constexpr double kExponentialSupTail = 1e-9;

struct Exponential {
  double rate;
};

struct Uniform {
  double lo;
  double hi;
};

/// Finite law on sorted atoms with nonnegative weights. Shared by Discrete
/// and Empirical; all queries are exact finite sums over prefix tables.
class AtomicLaw {
 public:
  /// `values` must be sorted ascending; `weights` parallel to it.
  AtomicLaw(std::vector<double> values, std::vector<double> weights);
  /// Unit weight per value (empirical samples, sorted ascending).
  explicit AtomicLaw(std::vector<double> sorted_samples);

  std::span<const double> values() const noexcept { return values_; }
  double weight(std::size_t i) const noexcept { return cum_w_[i + 1] - cum_w_[i]; }
  double total_weight() const noexcept { return cum_w_.back(); }
  std::size_t size() const noexcept { return values_.size(); }

  double mean() const noexcept { return cum_wv_.back() / cum_w_.back(); }
  double above(double u) const;  ///< E[(X-u)+]
  double below(double u) const;  ///< E[(u-X)+]
  double tail(double u) const;   ///< P(X >= u)
  double cdf(double x) const;    ///< P(X <= x)
  /// Number of atoms <= x and the weight/weighted-sum strictly above x.
  std::size_t count_at_most(double x) const;
  double weight_above_index(std::size_t i) const noexcept { return cum_w_.back() - cum_w_[i]; }
  double wsum_above_index(std::size_t i) const noexcept { return cum_wv_.back() - cum_wv_[i]; }
  double sample(StreamRng& rng) const;

 private:
  void build_prefix(const std::vector<double>& weights);

  std::vector<double> values_;
  std::vector<double> cum_w_;   // size n+1
  std::vector<double> cum_wv_;  // size n+1
  bool unit_weights_ = false;
};

struct Discrete {
  std::shared_ptr<const AtomicLaw> law;
};

struct Empirical {
  std::shared_ptr<const AtomicLaw> law;
};

/// E[(X-u)+], E[(u-X)+], P(X >= u) and E[X | X >= u] at one level u.
struct CensoredStats {
  double above = 0.0;
  double below = 0.0;
  double tail = 0.0;
  std::optional<double> cond_mean_above;
};

enum class Kind { exponential, uniform, discrete, empirical };

/// IID channel-quality law. Immutable; copies share atom tables.
class Distribution {
 public:
  static Distribution exponential(double rate);
  static Distribution uniform(double lo, double hi);
  /// Probabilities must sum to 1 within 1e-12; values >= 0.
  static Distribution discrete(std::vector<double> values, std::vector<double> probs);
  /// Samples need not be sorted.
  static Distribution empirical(std::vector<double> samples);
  static Distribution empirical_sorted(std::vector<double> sorted_samples);

  Kind kind() const noexcept;
  bool is_atomic() const noexcept;
  /// Atom table for discrete/empirical laws, nullptr otherwise.
  const AtomicLaw* atoms() const noexcept;

  double mean() const;
  double sup_value() const;  ///< finite upper support bound (truncated for exponential)
  double inf_value() const;

  double above(double u) const;
  double below(double u) const;
  double tail(double u) const;
  double cdf(double x) const;
  /// E[X; X > u], the first partial moment above u.
  double upper_partial_mean(double u) const;
  /// Density of an analytic law (0 for atomic laws).
  double pdf(double x) const;
  double quantile(double p) const;
  /// Points where an analytic density is discontinuous.
  std::vector<double> breakpoints() const;

  double sample(StreamRng& rng) const;

  std::string describe() const;

  const std::variant<Exponential, Uniform, Discrete, Empirical>& law() const noexcept { return law_; }

 private:
  explicit Distribution(std::variant<Exponential, Uniform, Discrete, Empirical> law)
      : law_(std::move(law)) {}

  std::variant<Exponential, Uniform, Discrete, Empirical> law_;
};

/// All four censored statistics of `d` at level u >= 0.
CensoredStats censored(const Distribution& d, double u);

/// One draw; deterministic in (d, rng state).
inline double sample(const Distribution& d, StreamRng& rng) { return d.sample(rng); }

/// Growable sample set of one unit, kept sorted for exact censored queries.
/// Samples live in sorted blocks so inserts stay cheap for large counts.
class EmpiricalEstimator {
 public:
  void add(double x);
  std::size_t count() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  /// Sorted view of every sample added so far.
  std::span<const double> samples() const;
  double sample_mean() const;
  /// Cached empirical law over the current samples.
  const Distribution& distribution() const;

  /// Root u >= 0 of E_n[max(X - u, 0)] = slope * u under the empirical law,
  /// found by walking the blocks from the top. Throws EmptySampleSet.
  double tail_fixed_point(double slope) const;

 private:
  struct Block {
    std::vector<double> values;  // sorted
    double sum = 0.0;
  };

  std::vector<Block> blocks_;
  std::size_t count_ = 0;
  double total_ = 0.0;
  mutable std::vector<double> flat_;
  mutable bool flat_valid_ = true;
  mutable std::optional<Distribution> cache_;
};

/// Empirical law placing 1/count on every stored sample.
/// Throws EmptySampleSet when the estimator is empty.
Distribution fit_empirical(const EmpiricalEstimator& est);

}  // namespace osr::dist
