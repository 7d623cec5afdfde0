#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spacerloss {

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t cells = 0;  // after pooling
  std::size_t observations = 0;
};

/// Pearson goodness of fit. `probs[i]` is the model probability of cell i;
/// the remaining mass 1 - sum(probs) forms an implicit tail cell with count
/// total - sum(observed). Cells expected below `min_expected` are pooled
/// with the tail before testing.
ChiSquareResult chi_square_gof(const std::vector<std::size_t>& observed, const std::vector<double>& probs,
                               std::size_t total, double min_expected = 5.0);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Two-sided normal p-value for a z score.
double normal_two_sided_p(double z);

struct ValidationConfig {
  double theta = 0.0;
  double rho = 1.0;
  double t_outer = 1.0;                // T
  std::optional<double> t_inner;       // T'; present selects the three-leaf tree
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;             // 0: worker_count()

  void validate() const;
};

struct ValidationCheck {
  std::string name;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t observations = 0;
  bool skipped = false;  // no data (e.g. M < 2 in every trial)
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  /// No non-skipped check has p-value below `alpha`.
  bool passed(double alpha = 1e-4) const;
};

/// Simulates `trials` replicates on the cherry (A:T, B:T) or on
/// ((A:T', B:T'):T-T', C:T) and compares:
///  - the first interior gap against the analytic gap pmf (chi-square),
///  - for two leaves, the marginal ΔV = V_2 - V_1 against Geom(exp(-rho T)),
///  - per-class counts of spacers gained after the root against their
///    Poisson means (z tests; classes with zero mean must never occur),
///  - the fraction of root spacers kept by every leaf against the die.
/// Trial k uses simulate_tree seed mix_seed(seed, k).
ValidationReport run_validation(const ValidationConfig& config);

void write_report(std::ostream& out, const ValidationReport& report, double alpha = 1e-4);

}  // namespace spacerloss
