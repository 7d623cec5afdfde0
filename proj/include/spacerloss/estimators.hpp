#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "spacerloss/process.hpp"

namespace spacerloss {

enum class EstimateMethod { pair_closed_form, triple_numeric, moments };

std::string_view to_string(EstimateMethod m);

struct EstimateDiagnostics {
  std::size_t shared = 0;            // M
  std::vector<std::size_t> unequal;  // D, or D1..D4
  std::size_t iterations = 0;
  bool boundary = false;
  bool multimodal = false;  // coarse grid found a better, distant optimum
};

struct EstimateResult {
  double rho_hat = 0.0;
  std::optional<double> theta_hat;
  double loglik = 0.0;
  EstimateMethod method = EstimateMethod::pair_closed_form;
  EstimateDiagnostics diagnostics;
};

struct ScalarMaximum {
  double argmax = 0.0;
  double value = 0.0;
  bool boundary = false;
  std::size_t iterations = 0;
};

/// Golden-section search for the maximum of a unimodal objective on
/// [lower, upper], refined until the bracket is narrower than `tol`. The
/// endpoints are evaluated too, so monotone objectives return an exact
/// endpoint. Throws InvalidArgument if the objective returns NaN.
ScalarMaximum maximize_scalar(const std::function<double(double)>& objective, double lower, double upper,
                              double tol);

/// p* = (1 + D / (2(M-1)))^{-1}, the maximizer of the two-leaf likelihood in
/// p = exp(-rho T).
double pair_p_star(std::size_t shared, std::size_t unequal);

/// Maximum-likelihood success probability of a negative binomial with
/// `successes` stopping successes and `failures` observed failures.
double negative_binomial_p_mle(std::size_t successes, std::size_t failures);

/// Closed-form two-leaf MLE rho* = -log(p*) / T. D = 0 gives the exact
/// boundary value rho* = 0. Throws InsufficientData when M < 2.
EstimateResult estimate_rho_pair(std::size_t shared, std::size_t unequal, double t);

/// Search bracket used by `estimate_rho_triple`.
struct RhoBracket {
  double lower;
  double upper;
};
RhoBracket triple_rho_bracket(double t_outer, double t_inner);
inline constexpr double kTripleRhoTolerance = 1e-9;

/// Numeric three-leaf MLE over [1e-8, 50/(T+T')]. Throws InsufficientData
/// when M < 2.
EstimateResult estimate_rho_triple(std::size_t shared, const std::array<std::size_t, 4>& d, double t_outer,
                                   double t_inner);

/// theta_hat = rho_hat * mean leaf array length.
double estimate_theta_moment(double rho_hat, const LeafArrays& arrays);

}  // namespace spacerloss
