#include "spacerloss/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spacerloss/errors.hpp"

namespace spacerloss {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// n * log_y with the convention 0 * log(0) = 0.
double xlogy(double n, double log_y) { return n == 0.0 ? 0.0 : n * log_y; }

void check_rate_time(double rho, double t) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be finite and > 0");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("branch time must be finite and > 0");
}

void check_triple_times(double rho, double t_outer, double t_inner) {
  check_rate_time(rho, t_inner);
  check_rate_time(rho, t_outer);
  if (t_outer < t_inner) throw InvalidArgument("need T >= T'");
}

// 1 - exp(-rho(T-T')) (2e^{-rho T'} - e^{-2 rho T'}), the total-loss
// probability of the cherry as seen from the root, written as a sum of
// nonnegative terms.
double cherry_loss(double rho, double t_outer, double t_inner) {
  const double u = std::exp(-rho * (t_outer - t_inner));
  const double miss = -std::expm1(-rho * t_inner);
  return -std::expm1(-rho * (t_outer - t_inner)) + u * miss * miss;
}

}  // namespace

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_multinomial(std::span<const std::size_t> counts) {
  double total = 0.0;
  double out = 0.0;
  for (std::size_t c : counts) {
    total += static_cast<double>(c);
    out -= std::lgamma(static_cast<double>(c) + 1.0);
  }
  return out + std::lgamma(total + 1.0);
}

double log_poisson(std::size_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : kNegInf;
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

std::array<double, 4> die_probs_pair(double rho, double t) {
  if (!(rho >= 0.0) || !(t >= 0.0)) throw InvalidArgument("rho and T must be >= 0");
  const double p = std::exp(-rho * t);
  const double miss = -std::expm1(-rho * t);
  return {p * miss, p * miss, miss * miss, p * p};
}

std::array<double, 8> die_probs_triple(double rho, double t_outer, double t_inner) {
  if (!(rho >= 0.0) || !(t_inner > 0.0) || !std::isfinite(t_outer))
    throw InvalidArgument("rho must be >= 0 and T' > 0");
  if (t_outer < t_inner) throw InvalidArgument("need T >= T'");
  const double e = std::exp(-rho * t_outer);
  const double e_in = std::exp(-rho * t_inner);
  const double miss = -std::expm1(-rho * t_outer);
  const double miss_in = -std::expm1(-rho * t_inner);
  const double g = cherry_loss(rho, t_outer, t_inner);
  return {e * miss_in * miss,  e * miss_in * miss,  e * g,          e * e_in * miss,
          e * e * miss_in,     e * e * miss_in,     miss * g,       e * e * e_in};
}

// ---------------------------------------------------------------------------

PairGapLaw::PairGapLaw(double rho, double t) : rho_(rho), t_(t) {
  check_rate_time(rho, t);
  p_ = std::exp(-rho * t);
  const double miss = -std::expm1(-rho * t);
  const double log_two_minus_p = std::log1p(miss);
  x_ = miss / (1.0 + miss);
  log_stop_ = -rho * t - log_two_minus_p;
  log_x_ = std::log(miss) - log_two_minus_p;
}

double PairGapLaw::log_pmf(std::size_t a, std::size_t b) const {
  if (rho_ * t_ > kMaxRhoTime) return kNegInf;
  const double n = static_cast<double>(a + b);
  return log_binomial(n, static_cast<double>(a)) + log_stop_ + xlogy(n, log_x_);
}

double PairGapLaw::pmf(std::size_t a, std::size_t b) const { return std::exp(log_pmf(a, b)); }

double pair_gap_pmf(std::size_t a, std::size_t b, double rho, double t) {
  return PairGapLaw(rho, t).pmf(a, b);
}

double pair_sampling_logpmf(std::span<const std::size_t> v, std::span<const std::size_t> w,
                            double theta, double rho, double t) {
  if (v.empty() || v.size() != w.size()) throw InvalidArgument("position vectors must be nonempty and equal length");
  if (!(theta >= 0.0)) throw InvalidArgument("theta must be >= 0");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool bad_first = i == 0 && (v[0] < 1 || w[0] < 1);
    const bool bad_step = i > 0 && (v[i] <= v[i - 1] || w[i] <= w[i - 1]);
    if (bad_first || bad_step) throw InvalidArgument("positions must be 1-based and strictly increasing");
  }
  const PairGapLaw law(rho, t);
  const double z = theta / rho * -std::expm1(-rho * t);

  // (V1 - 1, W1 - 1) = (C1 + A, C2 + B), C1, C2 ~ Poisson(z).
  const std::size_t v1 = v[0] - 1;
  const std::size_t w1 = w[0] - 1;
  std::vector<double> terms;
  terms.reserve((v1 + 1) * (w1 + 1));
  for (std::size_t a = 0; a <= v1; ++a)
    for (std::size_t b = 0; b <= w1; ++b)
      terms.push_back(law.log_pmf(a, b) + log_poisson(v1 - a, z) + log_poisson(w1 - b, z));
  const double top = *std::max_element(terms.begin(), terms.end());
  double first = kNegInf;
  if (std::isfinite(top)) {
    double s = 0.0;
    for (double x : terms) s += std::exp(x - top);
    first = top + std::log(s);
  }

  double rest = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    rest += law.log_pmf(v[i] - v[i - 1] - 1, w[i] - w[i - 1] - 1);
  return first + rest;
}

// ---------------------------------------------------------------------------

TripleGapLaw::TripleGapLaw(double rho, double t_outer, double t_inner)
    : rho_(rho), t_outer_(t_outer), t_inner_(t_inner) {
  check_triple_times(rho, t_outer, t_inner);
  q_ = die_probs_triple(rho, t_outer, t_inner);
  const double e_in = std::exp(-rho * t_inner);
  const double g = cherry_loss(rho, t_outer, t_inner);
  r_ = 2.0 - e_in + g;
  const double log_r = std::log(r_);
  const double log_miss = std::log(-std::expm1(-rho * t_outer));
  const double log_miss_in = std::log(-std::expm1(-rho * t_inner));
  const double singles = log_miss + log_miss_in - log_r;
  const double outgroup = std::log(g) - log_r;
  const double cherry = -rho * t_inner + log_miss - log_r;
  const double cross = -rho * t_outer + log_miss_in - log_r;
  log_class_ = {singles, singles, outgroup, cherry, cross, cross};
  log_stop_ = -rho * (t_outer + t_inner) - log_r;
}

double TripleGapLaw::log_pmf(const TripleCounts& counts) const {
  if (rho_ * t_outer_ > kMaxRhoTime) return kNegInf;
  double out = log_multinomial(counts) + log_stop_;
  for (std::size_t i = 0; i < counts.size(); ++i) out += xlogy(static_cast<double>(counts[i]), log_class_[i]);
  return out;
}

double TripleGapLaw::pmf(const TripleCounts& counts) const { return std::exp(log_pmf(counts)); }

double triple_gap_pmf(const TripleCounts& counts, double rho, double t_outer, double t_inner) {
  return TripleGapLaw(rho, t_outer, t_inner).pmf(counts);
}

// ---------------------------------------------------------------------------

GeneralGapLaw::GeneralGapLaw(const UltrametricTree& tree, double rho) : leaf_count_(tree.leaf_count()) {
  if (leaf_count_ > 20) throw InvalidArgument("general gap law supports at most 20 leaves");
  const SurvivalTable table(tree, rho);
  p_root_ = table.p(tree.root());
  log_p_root_ = std::log(p_root_);
  log_p_all_ = -rho * spanning_length(tree, tree.root(), tree.all_leaves());
  const std::size_t masks = std::size_t{1} << leaf_count_;
  p_subset_.assign(masks, 0.0);
  log_p_subset_.assign(masks, kNegInf);
  for (std::size_t k = 1; k + 1 < masks; ++k) {
    p_subset_[k] = p_exact_subset(tree, table, tree.root(), LeafSet{k});
    log_p_subset_[k] = std::log(p_subset_[k]);
  }
}

double GeneralGapLaw::log_pmf(std::span<const std::size_t> dense_counts) const {
  const std::size_t masks = std::size_t{1} << leaf_count_;
  if (dense_counts.size() != masks) throw InvalidArgument("dense counts must have 2^n entries");
  if (dense_counts.front() != 0 || dense_counts.back() != 0)
    throw InvalidArgument("counts are only defined for nonempty proper subsets");
  double total = 0.0;
  double out = log_p_all_;
  for (std::size_t k = 1; k + 1 < masks; ++k) {
    const double a = static_cast<double>(dense_counts[k]);
    if (a == 0.0) continue;
    total += a;
    out += a * log_p_subset_[k] - std::lgamma(a + 1.0);
  }
  return out + std::lgamma(total + 1.0) - (1.0 + total) * log_p_root_;
}

double GeneralGapLaw::log_pmf(const std::map<LeafSet, std::size_t>& counts) const {
  std::vector<std::size_t> dense(std::size_t{1} << leaf_count_, 0);
  const LeafSet all = LeafSet::first(leaf_count_);
  for (const auto& [k, a] : counts) {
    if (k.empty() || k == all || !k.subset_of(all))
      throw InvalidArgument("count key is not a nonempty proper leaf subset");
    dense[k.bits()] = a;
  }
  return log_pmf(dense);
}

double general_gap_logpmf(const UltrametricTree& tree, double rho,
                          const std::map<LeafSet, std::size_t>& counts) {
  return GeneralGapLaw(tree, rho).log_pmf(counts);
}

// ---------------------------------------------------------------------------

double pair_conditional_loglik(std::size_t shared, std::size_t unequal, double rho, double t) {
  if (shared < 2) throw InvalidArgument("pair log-likelihood needs M >= 2");
  if (!(rho >= 0.0) || !(t > 0.0)) throw InvalidArgument("need rho >= 0 and T > 0");
  if (rho * t > kMaxRhoTime) return kNegInf;
  const double miss = -std::expm1(-rho * t);
  const double log_two_minus_p = std::log1p(miss);
  const double m1 = static_cast<double>(shared - 1);
  const double d = static_cast<double>(unequal);
  return m1 * (-rho * t - log_two_minus_p) + xlogy(d, std::log(miss) - log_two_minus_p);
}

double triple_conditional_loglik(std::size_t shared, const std::array<std::size_t, 4>& d, double rho,
                                 double t_outer, double t_inner) {
  if (shared < 2) throw InvalidArgument("triple log-likelihood needs M >= 2");
  if (!(rho >= 0.0) || !(t_inner > 0.0)) throw InvalidArgument("need rho >= 0 and T' > 0");
  if (t_outer < t_inner) throw InvalidArgument("need T >= T'");
  if (rho * t_outer > kMaxRhoTime) return kNegInf;
  const double e_in = std::exp(-rho * t_inner);
  const double log_miss = std::log(-std::expm1(-rho * t_outer));
  const double log_miss_in = std::log(-std::expm1(-rho * t_inner));
  const double g = cherry_loss(rho, t_outer, t_inner);
  const double r = 2.0 - e_in + g;
  const double m1 = static_cast<double>(shared - 1);
  const auto dd = [&](std::size_t i) { return static_cast<double>(d[i]); };
  return -m1 * rho * (t_outer + t_inner) + xlogy(dd(0), log_miss + log_miss_in) + xlogy(dd(1), std::log(g)) +
         xlogy(dd(2), -rho * t_inner + log_miss) + xlogy(dd(3), -rho * t_outer + log_miss_in) -
         (m1 + dd(0) + dd(1) + dd(2) + dd(3)) * std::log(r);
}

}  // namespace spacerloss
