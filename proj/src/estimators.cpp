#include "spacerloss/estimators.hpp"

#include <cmath>

#include "spacerloss/errors.hpp"
#include "spacerloss/likelihood.hpp"

namespace spacerloss {

std::string_view to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::pair_closed_form:
      return "pair-closed-form";
    case EstimateMethod::triple_numeric:
      return "triple-numeric";
    case EstimateMethod::moments:
      return "moments";
  }
  return "unknown";
}

ScalarMaximum maximize_scalar(const std::function<double(double)>& objective, double lower, double upper,
                              double tol) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper))
    throw InvalidArgument("maximize_scalar needs a finite bracket with lower < upper");
  if (!(tol > 0.0)) throw InvalidArgument("maximize_scalar needs tol > 0");

  ScalarMaximum out;
  auto eval = [&](double x) {
    const double y = objective(x);
    if (std::isnan(y)) throw InvalidArgument("objective returned NaN at " + std::to_string(x));
    ++out.iterations;
    return y;
  };

  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lower;
  double b = upper;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  out.argmax = fc >= fd ? c : d;
  out.value = std::max(fc, fd);

  // Endpoints win ties so monotone objectives report exact boundary values.
  const double f_lo = eval(lower);
  const double f_hi = eval(upper);
  if (f_lo >= out.value && out.argmax - lower <= tol) {
    out.argmax = lower;
    out.value = f_lo;
  } else if (f_hi >= out.value && upper - out.argmax <= tol) {
    out.argmax = upper;
    out.value = f_hi;
  }
  out.boundary = out.argmax - lower <= tol || upper - out.argmax <= tol;
  return out;
}

double pair_p_star(std::size_t shared, std::size_t unequal) {
  if (shared < 2) throw InsufficientData("pair estimator needs M >= 2");
  return 1.0 / (1.0 + static_cast<double>(unequal) / (2.0 * static_cast<double>(shared - 1)));
}

double negative_binomial_p_mle(std::size_t successes, std::size_t failures) {
  if (successes == 0) throw InsufficientData("negative binomial MLE needs at least one success");
  const double r = static_cast<double>(successes);
  return r / (r + static_cast<double>(failures));
}

EstimateResult estimate_rho_pair(std::size_t shared, std::size_t unequal, double t) {
  if (shared < 2) throw InsufficientData("M<2");
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("T must be finite and > 0");
  EstimateResult out;
  out.method = EstimateMethod::pair_closed_form;
  out.diagnostics.shared = shared;
  out.diagnostics.unequal = {unequal};
  if (unequal == 0) {
    out.rho_hat = 0.0;
    out.diagnostics.boundary = true;
  } else {
    out.rho_hat = -std::log(pair_p_star(shared, unequal)) / t;
  }
  out.loglik = pair_conditional_loglik(shared, unequal, out.rho_hat, t);
  return out;
}

RhoBracket triple_rho_bracket(double t_outer, double t_inner) {
  return {1e-8, 50.0 / (t_outer + t_inner)};
}

EstimateResult estimate_rho_triple(std::size_t shared, const std::array<std::size_t, 4>& d, double t_outer,
                                   double t_inner) {
  if (shared < 2) throw InsufficientData("M<2");
  if (!(t_inner > 0.0) || !std::isfinite(t_outer)) throw InvalidArgument("need finite T >= T' > 0");
  if (t_outer < t_inner) throw InvalidArgument("need T >= T'");

  auto objective = [&](double rho) { return triple_conditional_loglik(shared, d, rho, t_outer, t_inner); };
  const auto bracket = triple_rho_bracket(t_outer, t_inner);
  const auto best = maximize_scalar(objective, bracket.lower, bracket.upper, kTripleRhoTolerance);

  EstimateResult out;
  out.method = EstimateMethod::triple_numeric;
  out.rho_hat = best.argmax;
  out.loglik = best.value;
  out.diagnostics.shared = shared;
  out.diagnostics.unequal.assign(d.begin(), d.end());
  out.diagnostics.iterations = best.iterations;
  out.diagnostics.boundary = best.boundary;

  constexpr int kGrid = 400;
  const double step = (bracket.upper - bracket.lower) / kGrid;
  for (int i = 0; i <= kGrid; ++i) {
    const double rho = bracket.lower + i * step;
    if (objective(rho) > best.value && std::abs(rho - best.argmax) > 10.0 * kTripleRhoTolerance + step) {
      out.diagnostics.multimodal = true;
      break;
    }
  }
  return out;
}

double estimate_theta_moment(double rho_hat, const LeafArrays& arrays) {
  if (!(rho_hat > 0.0) || !std::isfinite(rho_hat)) throw InvalidArgument("moment estimate needs rho_hat > 0");
  return rho_hat * arrays.mean_length();
}

}  // namespace spacerloss
