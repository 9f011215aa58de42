#include "osr/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "osr/error.hpp"

namespace osr::dist {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

// ---------------------------------------------------------------- AtomicLaw

AtomicLaw::AtomicLaw(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)) {
  require(values_.size() == weights.size(), "atom values and weights differ in length");
  require(!values_.empty(), "atomic law needs at least one atom");
  require(std::is_sorted(values_.begin(), values_.end()), "atom values must be sorted");
  build_prefix(weights);
}

AtomicLaw::AtomicLaw(std::vector<double> sorted_samples)
    : values_(std::move(sorted_samples)), unit_weights_(true) {
  require(!values_.empty(), "atomic law needs at least one atom");
  build_prefix({});
}

void AtomicLaw::build_prefix(const std::vector<double>& weights) {
  const std::size_t n = values_.size();
  cum_w_.assign(n + 1, 0.0);
  cum_wv_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = unit_weights_ ? 1.0 : weights[i];
    cum_w_[i + 1] = unit_weights_ ? static_cast<double>(i + 1) : cum_w_[i] + w;
    cum_wv_[i + 1] = cum_wv_[i] + w * values_[i];
  }
}

std::size_t AtomicLaw::count_at_most(double x) const {
  return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) -
                                  values_.begin());
}

double AtomicLaw::above(double u) const {
  const std::size_t i = count_at_most(u);
  const double v = wsum_above_index(i) - u * weight_above_index(i);
  return std::max(0.0, v / total_weight());
}

double AtomicLaw::below(double u) const {
  const std::size_t i = count_at_most(u);
  const double v = u * cum_w_[i] - cum_wv_[i];
  return std::max(0.0, v / total_weight());
}

double AtomicLaw::tail(double u) const {
  const auto j = static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), u) -
                                          values_.begin());
  return weight_above_index(j) / total_weight();
}

double AtomicLaw::cdf(double x) const { return cum_w_[count_at_most(x)] / total_weight(); }

double AtomicLaw::sample(StreamRng& rng) const {
  const double u = rng.uniform01();
  if (unit_weights_) {
    auto i = static_cast<std::size_t>(u * static_cast<double>(values_.size()));
    return values_[std::min(i, values_.size() - 1)];
  }
  const double target = u * total_weight();
  auto it = std::upper_bound(cum_w_.begin() + 1, cum_w_.end(), target);
  std::size_t i = static_cast<std::size_t>(it - cum_w_.begin()) - 1;
  i = std::min(i, values_.size() - 1);
  // Skip zero-weight atoms that upper_bound can land on.
  while (weight(i) <= 0.0 && i + 1 < values_.size()) ++i;
  return values_[i];
}

// ------------------------------------------------------------- Distribution

Distribution Distribution::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive and finite");
  return Distribution(Exponential{rate});
}

Distribution Distribution::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi), "uniform bounds must be finite");
  require(lo >= 0.0, "uniform support must be nonnegative");
  require(lo < hi, "uniform needs lo < hi");
  return Distribution(Uniform{lo, hi});
}

Distribution Distribution::discrete(std::vector<double> values, std::vector<double> probs) {
  require(!values.empty(), "discrete law needs at least one value");
  require(values.size() == probs.size(), "discrete values and probabilities differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]) && values[i] >= 0.0, "discrete values must be finite and >= 0");
    require(std::isfinite(probs[i]) && probs[i] >= 0.0, "discrete probabilities must be >= 0");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "discrete probabilities must sum to 1");
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> v;
  std::vector<double> w;
  for (std::size_t i : idx) {
    if (!v.empty() && v.back() == values[i]) {
      w.back() += probs[i];
    } else {
      v.push_back(values[i]);
      w.push_back(probs[i]);
    }
  }
  auto law = std::make_shared<const AtomicLaw>(std::move(v), std::move(w));
  require(law->mean() > 0.0, "channel mean must be positive");
  return Distribution(Discrete{std::move(law)});
}

Distribution Distribution::empirical(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  return empirical_sorted(std::move(samples));
}

Distribution Distribution::empirical_sorted(std::vector<double> sorted_samples) {
  if (sorted_samples.empty()) throw EmptySampleSet();
  require(sorted_samples.front() >= 0.0 && std::isfinite(sorted_samples.back()),
          "empirical samples must be finite and >= 0");
  return Distribution(Empirical{std::make_shared<const AtomicLaw>(std::move(sorted_samples))});
}

Kind Distribution::kind() const noexcept {
  return static_cast<Kind>(law_.index());
}

bool Distribution::is_atomic() const noexcept {
  return kind() == Kind::discrete || kind() == Kind::empirical;
}

const AtomicLaw* Distribution::atoms() const noexcept {
  if (auto* d = std::get_if<Discrete>(&law_)) return d->law.get();
  if (auto* e = std::get_if<Empirical>(&law_)) return e->law.get();
  return nullptr;
}

double Distribution::mean() const {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                        [](const auto& a) { return a.law->mean(); },
                    },
                    law_);
}

double Distribution::sup_value() const {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return -std::log(kExponentialSupTail) / e.rate; },
                        [](const Uniform& u) { return u.hi; },
                        [](const auto& a) { return a.law->values().back(); },
                    },
                    law_);
}

double Distribution::inf_value() const {
  return std::visit(Overloaded{
                        [](const Exponential&) { return 0.0; },
                        [](const Uniform& u) { return u.lo; },
                        [](const auto& a) { return a.law->values().front(); },
                    },
                    law_);
}

double Distribution::above(double u) const {
  return std::visit(Overloaded{
                        [u](const Exponential& e) {
                          if (u <= 0.0) return 1.0 / e.rate - u;
                          return std::exp(-e.rate * u) / e.rate;
                        },
                        [u](const Uniform& d) {
                          if (u <= d.lo) return 0.5 * (d.lo + d.hi) - u;
                          if (u >= d.hi) return 0.0;
                          return (d.hi - u) * (d.hi - u) / (2.0 * (d.hi - d.lo));
                        },
                        [u](const auto& a) { return a.law->above(u); },
                    },
                    law_);
}

double Distribution::below(double u) const {
  return std::visit(Overloaded{
                        [u](const Exponential& e) {
                          if (u <= 0.0) return 0.0;
                          // u - 1/rate + exp(-rate u)/rate
                          return std::max(0.0, u + std::expm1(-e.rate * u) / e.rate);
                        },
                        [u](const Uniform& d) {
                          if (u <= d.lo) return 0.0;
                          if (u >= d.hi) return u - 0.5 * (d.lo + d.hi);
                          return (u - d.lo) * (u - d.lo) / (2.0 * (d.hi - d.lo));
                        },
                        [u](const auto& a) { return a.law->below(u); },
                    },
                    law_);
}

double Distribution::tail(double u) const {
  return std::visit(Overloaded{
                        [u](const Exponential& e) { return u <= 0.0 ? 1.0 : std::exp(-e.rate * u); },
                        [u](const Uniform& d) {
                          if (u <= d.lo) return 1.0;
                          if (u >= d.hi) return 0.0;
                          return (d.hi - u) / (d.hi - d.lo);
                        },
                        [u](const auto& a) { return a.law->tail(u); },
                    },
                    law_);
}

double Distribution::cdf(double x) const {
  return std::visit(Overloaded{
                        [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
                        [x](const Uniform& d) {
                          if (x <= d.lo) return 0.0;
                          if (x >= d.hi) return 1.0;
                          return (x - d.lo) / (d.hi - d.lo);
                        },
                        [x](const auto& a) { return a.law->cdf(x); },
                    },
                    law_);
}

double Distribution::upper_partial_mean(double u) const {
  return std::visit(Overloaded{
                        [u](const Exponential& e) {
                          if (u <= 0.0) return 1.0 / e.rate;
                          return std::exp(-e.rate * u) * (u + 1.0 / e.rate);
                        },
                        [u](const Uniform& d) {
                          const double lo = std::max(u, d.lo);
                          if (lo >= d.hi) return 0.0;
                          return (d.hi * d.hi - lo * lo) / (2.0 * (d.hi - d.lo));
                        },
                        [u](const auto& a) {
                          const auto& law = *a.law;
                          return law.wsum_above_index(law.count_at_most(u)) / law.total_weight();
                        },
                    },
                    law_);
}

double Distribution::pdf(double x) const {
  return std::visit(Overloaded{
                        [x](const Exponential& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
                        [x](const Uniform& d) { return (x < d.lo || x > d.hi) ? 0.0 : 1.0 / (d.hi - d.lo); },
                        [](const auto&) { return 0.0; },
                    },
                    law_);
}

double Distribution::quantile(double p) const {
  p = std::clamp(p, 0.0, 1.0);
  return std::visit(Overloaded{
                        [p](const Exponential& e) { return -std::log1p(-p) / e.rate; },
                        [p](const Uniform& d) { return d.lo + p * (d.hi - d.lo); },
                        [p](const auto& a) {
                          const auto& law = *a.law;
                          const double target = p * law.total_weight();
                          for (std::size_t i = 0; i < law.size(); ++i) {
                            if (law.total_weight() - law.weight_above_index(i + 1) >= target &&
                                law.weight(i) > 0.0) {
                              return law.values()[i];
                            }
                          }
                          return law.values().back();
                        },
                    },
                    law_);
}

std::vector<double> Distribution::breakpoints() const {
  if (auto* u = std::get_if<Uniform>(&law_)) return {u->lo, u->hi};
  if (std::holds_alternative<Exponential>(law_)) return {0.0};
  return {};
}

double Distribution::sample(StreamRng& rng) const {
  return std::visit(Overloaded{
                        [&rng](const Exponential& e) { return -std::log1p(-rng.uniform01()) / e.rate; },
                        [&rng](const Uniform& d) { return d.lo + (d.hi - d.lo) * rng.uniform01(); },
                        [&rng](const auto& a) { return a.law->sample(rng); },
                    },
                    law_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os.precision(6);
  std::visit(Overloaded{
                 [&](const Exponential& e) { os << "exponential(rate=" << e.rate << ")"; },
                 [&](const Uniform& u) { os << "uniform(" << u.lo << ", " << u.hi << ")"; },
                 [&](const Discrete& d) { os << "discrete(" << d.law->size() << " atoms)"; },
                 [&](const Empirical& e) { os << "empirical(n=" << e.law->size() << ")"; },
             },
             law_);
  return os.str();
}

CensoredStats censored(const Distribution& d, double u) {
  CensoredStats s;
  s.above = d.above(u);
  s.below = d.below(u);
  s.tail = d.tail(u);
  if (s.tail > 0.0) {
    if (const AtomicLaw* law = d.atoms()) {
      // E[X | X >= u] over the atoms at or above u.
      const auto j = static_cast<std::size_t>(
          std::lower_bound(law->values().begin(), law->values().end(), u) - law->values().begin());
      s.cond_mean_above = law->wsum_above_index(j) / law->weight_above_index(j);
    } else {
      // E[X; X >= u] = E[(X-u)+] + u P(X >= u) for continuous laws.
      s.cond_mean_above = u + s.above / s.tail;
      if (u < d.inf_value()) s.cond_mean_above = d.mean();
    }
  }
  return s;
}

// ------------------------------------------------------- EmpiricalEstimator

namespace {
constexpr std::size_t kBlockSize = 512;
}

void EmpiricalEstimator::add(double x) {
  if (!std::isfinite(x) || x < 0.0) throw InvalidArgument("observed reward must be finite and >= 0");
  if (blocks_.empty()) blocks_.push_back(Block{{}, 0.0});
  auto it = blocks_.begin();
  if (!it->values.empty()) {
    it = std::lower_bound(blocks_.begin(), blocks_.end(), x,
                          [](const Block& blk, double v) { return blk.values.back() < v; });
    if (it == blocks_.end()) --it;
  }
  it->values.insert(std::upper_bound(it->values.begin(), it->values.end(), x), x);
  it->sum += x;
  if (it->values.size() >= 2 * kBlockSize) {
    Block upper;
    const auto mid = it->values.begin() + static_cast<std::ptrdiff_t>(kBlockSize);
    upper.values.assign(mid, it->values.end());
    it->values.erase(mid, it->values.end());
    it->sum = 0.0;
    for (double v : it->values) it->sum += v;
    for (double v : upper.values) upper.sum += v;
    blocks_.insert(it + 1, std::move(upper));
  }
  ++count_;
  total_ += x;
  flat_valid_ = false;
  cache_.reset();
}

std::span<const double> EmpiricalEstimator::samples() const {
  if (!flat_valid_) {
    flat_.clear();
    flat_.reserve(count_);
    for (const Block& blk : blocks_) flat_.insert(flat_.end(), blk.values.begin(), blk.values.end());
    flat_valid_ = true;
  }
  return flat_;
}

double EmpiricalEstimator::sample_mean() const {
  if (empty()) throw EmptySampleSet();
  return distribution().mean();
}

const Distribution& EmpiricalEstimator::distribution() const {
  if (empty()) throw EmptySampleSet();
  if (!cache_) {
    const auto s = samples();
    cache_ = Distribution::empirical_sorted(std::vector<double>(s.begin(), s.end()));
  }
  return *cache_;
}

double EmpiricalEstimator::tail_fixed_point(double slope) const {
  if (empty()) throw EmptySampleSet();
  if (!(slope > 0.0) || !std::isfinite(slope)) throw InvalidArgument("slope must be positive");
  // With k samples above u summing to S, n E_n[(X - u)+] = S - k u, so on each
  // gap between samples the root is S / (k + n slope).
  const double ns = static_cast<double>(count_) * slope;
  double k = 0.0;
  double sum = 0.0;
  auto residual = [&](double u) { return sum - k * u - ns * u; };
  for (auto blk = blocks_.rbegin(); blk != blocks_.rend(); ++blk) {
    if (blk->values.empty()) continue;
    if (residual(blk->values.back()) >= 0.0) return sum / (k + ns);
    const double lo = blk->values.front();
    const double k_all = k + static_cast<double>(blk->values.size());
    if (blk->sum + sum - k_all * lo - ns * lo <= 0.0) {
      k = k_all;
      sum += blk->sum;
      continue;
    }
    for (auto v = blk->values.rbegin(); v != blk->values.rend(); ++v) {
      if (residual(*v) >= 0.0) return sum / (k + ns);
      k += 1.0;
      sum += *v;
    }
  }
  return sum / (k + ns);
}

Distribution fit_empirical(const EmpiricalEstimator& est) { return est.distribution(); }

}  // namespace osr::dist
