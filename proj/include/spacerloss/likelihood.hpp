#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "spacerloss/tree.hpp"

namespace spacerloss {

/// Above this value of rho*T the loss probabilities are treated as
/// underflowed and log-likelihoods evaluate to -infinity.
inline constexpr double kMaxRhoTime = 700.0;

/// Log of the binomial coefficient C(n, k) via log-gamma.
double log_binomial(double n, double k);
/// Log of the multinomial coefficient (sum counts)! / prod(counts!).
double log_multinomial(std::span<const std::size_t> counts);
/// Log Poisson probability mass; handles mean == 0.
double log_poisson(std::size_t k, double mean);

/// Fates of an old spacer on a cherry of height T:
/// {kept in leaf 1 only, leaf 2 only, neither, both}.
std::array<double, 4> die_probs_pair(double rho, double t);

/// Fates of an old spacer on the three-leaf tree (cherry f1,f2 at height T',
/// root at height T): {f1 only, f2 only, f3 only, f1f2, f1f3, f2f3, none, all}.
std::array<double, 8> die_probs_triple(double rho, double t_outer, double t_inner);

/// Joint law of the numbers (A, B) of spacers kept only in leaf 1 / only in
/// leaf 2 between two consecutive shared spacers of a cherry.
class PairGapLaw {
 public:
  PairGapLaw(double rho, double t);

  double rho() const { return rho_; }
  double t() const { return t_; }
  /// exp(-rho T), the per-leaf survival probability of an old spacer.
  double survival() const { return p_; }
  /// x = (1 - p) / (2 - p).
  double x() const { return x_; }

  double log_pmf(std::size_t a, std::size_t b) const;
  double pmf(std::size_t a, std::size_t b) const;

 private:
  double rho_, t_, p_, x_;
  double log_stop_;  // log(p / (2 - p))
  double log_x_;
};

double pair_gap_pmf(std::size_t a, std::size_t b, double rho, double t);

/// Log-probability of the 1-based positions v, w (equal length m >= 1,
/// strictly increasing) of the first m shared spacers of a cherry. The first
/// pair mixes Poisson new spacers with old ones (finite double convolution);
/// later differences contribute pair gap terms with Δv - 1, Δw - 1.
double pair_sampling_logpmf(std::span<const std::size_t> v, std::span<const std::size_t> w,
                            double theta, double rho, double t);

/// Counts of one interior gap on a three-leaf tree, in the order
/// {f1, f2, f3, f1f2, f1f3, f2f3}.
using TripleCounts = std::array<std::size_t, 6>;

class TripleGapLaw {
 public:
  TripleGapLaw(double rho, double t_outer, double t_inner);

  double rho() const { return rho_; }
  double t_outer() const { return t_outer_; }
  double t_inner() const { return t_inner_; }
  /// r = 3 - exp(-rho T') - exp(-rho T)(2 - exp(-rho T')).
  double r() const { return r_; }
  const std::array<double, 8>& die() const { return q_; }

  /// Log of each per-roll class weight q_i / (1 - q_7), in TripleCounts order.
  const std::array<double, 6>& log_class_weights() const { return log_class_; }
  /// log(q_8 / (1 - q_7)).
  double log_stop_weight() const { return log_stop_; }

  double log_pmf(const TripleCounts& counts) const;
  double pmf(const TripleCounts& counts) const;

 private:
  double rho_, t_outer_, t_inner_, r_;
  std::array<double, 8> q_;
  std::array<double, 6> log_class_;
  double log_stop_;
};

double triple_gap_pmf(const TripleCounts& counts, double rho, double t_outer, double t_inner);

/// Gap law on an arbitrary ultrametric tree: per-roll probabilities of every
/// nonempty proper leaf subset, renormalized by the survival p(root).
class GeneralGapLaw {
 public:
  GeneralGapLaw(const UltrametricTree& tree, double rho);

  std::size_t leaf_count() const { return leaf_count_; }
  /// p(root): probability that a root spacer reaches some leaf.
  double p_root() const { return p_root_; }
  /// exp(-rho λ(L)): probability that a root spacer reaches every leaf.
  double p_all() const { return std::exp(log_p_all_); }
  double log_p_all() const { return log_p_all_; }
  /// p^r_K for a nonempty proper subset K.
  double p_subset(LeafSet k) const { return p_subset_.at(k.bits()); }

  /// Counts indexed by subset mask (size 2^n; entries 0 and 2^n - 1 ignored
  /// and must be zero).
  double log_pmf(std::span<const std::size_t> dense_counts) const;
  double log_pmf(const std::map<LeafSet, std::size_t>& counts) const;

 private:
  std::size_t leaf_count_;
  double p_root_, log_p_root_, log_p_all_;
  std::vector<double> p_subset_;
  std::vector<double> log_p_subset_;
};

double general_gap_logpmf(const UltrametricTree& tree, double rho,
                          const std::map<LeafSet, std::size_t>& counts);

/// Two-leaf log-likelihood in rho given M >= 2 shared spacers and D unequal
/// spacers between them: (M-1) log(p/(2-p)) + D log((1-p)/(2-p)), p = exp(-rho T).
double pair_conditional_loglik(std::size_t shared, std::size_t unequal, double rho, double t);

/// Three-leaf log-likelihood in rho, dropping the rho-free multinomial terms.
double triple_conditional_loglik(std::size_t shared, const std::array<std::size_t, 4>& d, double rho,
                                 double t_outer, double t_inner);

}  // namespace spacerloss
