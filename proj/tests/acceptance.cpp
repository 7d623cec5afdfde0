// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes, except for criteria listed
// in kKnownUnattainable: those still print FAIL with the reason, and only
// a pass would be reported as unexpected.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spacerloss/equal_spacers.hpp"
#include "spacerloss/estimators.hpp"
#include "spacerloss/experiment.hpp"
#include "spacerloss/likelihood.hpp"
#include "spacerloss/validation.hpp"

using namespace spacerloss;

namespace {

// The stated n=3 mean of M is half of the exact value
// theta / (rho (1 + rho)(1 + 2 rho)); see the line printed as 7c.
const std::set<std::string> kKnownUnattainable{"7b"};

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;
int known_failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& check,
            double time_limit_s = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out = check();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0.0 && secs > time_limit_s) {
    out.pass = false;
    out.detail += "; over the time limit";
  }
  const bool known = kKnownUnattainable.count(id) > 0;
  std::printf("[%s] %-3s %s: %s (%.1f s)%s\n", out.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(),
              out.detail.c_str(), secs, !out.pass && known ? " [known unattainable]" : "");
  std::fflush(stdout);
  if (!out.pass) (known ? known_failures : failures) += 1;
  if (out.pass && known) {
    std::printf("      %s passed although listed as unattainable\n", id.c_str());
    failures += 1;
  }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// --- 1 -------------------------------------------------------------------

Outcome pmf_normalization() {
  double worst = 0.0;
  // Pair: P(A + B > S) = (2x)^(S+1) is exact.
  for (double e : {0.1, 0.5, 0.9})
    for (double t : {0.5, 1.0, 3.0}) {
      const double rho = -std::log(e) / t;
      const PairGapLaw law(rho, t);
      constexpr std::size_t kS = 400;
      double sum = 0.0;
      for (std::size_t a = 0; a <= kS; ++a)
        for (std::size_t b = 0; a + b <= kS; ++b) sum += law.pmf(a, b);
      worst = std::max(worst, std::abs(sum + std::pow(2 * law.x(), kS + 1.0) - 1.0));
    }
  // Triple: the total count is geometric with stop weight q8 / (1 - q7).
  for (double e : {0.1, 0.5, 0.9})
    for (double ratio : {0.25, 0.5, 1.0}) {
      const double t = 1.0, tp = ratio * t, rho = -std::log(e) / t;
      const TripleGapLaw law(rho, t, tp);
      const double stop = std::exp(law.log_stop_weight());
      constexpr std::size_t kS = 24;
      double sum = 0.0;
      TripleCounts c{};
      std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i == 6) {
          sum += law.pmf(c);
          return;
        }
        for (std::size_t k = 0; k <= left; ++k) {
          c[i] = k;
          rec(i + 1, left - k);
        }
        c[i] = 0;
      };
      rec(0, kS);
      worst = std::max(worst, std::abs(sum + std::pow(1 - stop, kS + 1.0) - 1.0));
    }
  return {worst <= 1e-9, fmt("max |sum + tail - 1| = %.3g over 18 settings", worst)};
}

// --- 2, 3 ----------------------------------------------------------------

const ValidationCheck& find_check(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("missing check " + name);
}

Outcome pair_agreement() {
  ValidationConfig cfg;
  cfg.rho = std::log(2.0);
  cfg.theta = 100.0 * cfg.rho;
  cfg.t_outer = 1.0;
  cfg.trials = 100000;
  cfg.seed = 20240601;
  const auto r = run_validation(cfg);
  const auto& gap = find_check(r, "pair gap pmf");
  const auto& dv = find_check(r, "delta V geometric");
  const bool pass = !gap.skipped && !dv.skipped && gap.p_value > 0.01 && dv.p_value > 0.01;
  return {pass, fmt("gap chi2 = %.1f (dof %.0f), p = %.3f; delta V p = %.3f", gap.statistic, gap.dof, gap.p_value,
                    dv.p_value)};
}

Outcome triple_agreement() {
  ValidationConfig cfg;
  cfg.rho = std::log(2.0);
  cfg.theta = 100.0 * cfg.rho;
  cfg.t_outer = 1.0;
  cfg.t_inner = 0.5;
  cfg.trials = 100000;
  cfg.seed = 20240602;
  const auto r = run_validation(cfg);
  const auto& gap = find_check(r, "triple gap pmf");
  bool pass = !gap.skipped && gap.p_value > 0.01;
  double worst_z = 0.0;
  for (const char* k : {"f1", "f2", "f3", "f1f2"}) {
    const auto& c = find_check(r, std::string("gained C^{") + k + "} mean");
    worst_z = std::max(worst_z, std::abs(c.statistic));
  }
  pass = pass && worst_z < 3.0;
  const double cross = find_check(r, "gained C^{f1f3} mean").statistic + find_check(r, "gained C^{f2f3} mean").statistic;
  pass = pass && cross == 0.0;
  return {pass, fmt("gap chi2 = %.1f (dof %.0f), p = %.3f", gap.statistic, gap.dof, gap.p_value) +
                    fmt("; max |z| of class means = %.2f; f1f3 + f2f3 count = %.0f", worst_z, cross)};
}

// --- 4 -------------------------------------------------------------------

Outcome general_reduction() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  double worst = 0.0;
  constexpr std::size_t kMax = 8;
  for (int setting = 0; setting < 5; ++setting) {
    const double rho = 0.1 + 2.0 * unit(rng);
    const double t = 0.2 + 2.0 * unit(rng);
    const double tp = t * unit(rng);
    auto rel = [&](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

    std::vector<UltrametricTree::Node> nodes(3);
    nodes[0].label = "A";
    nodes[1].label = "B";
    nodes[0].length = nodes[1].length = t;
    nodes[2].children = {0, 1};
    nodes[0].parent = nodes[1].parent = 2;
    const UltrametricTree cherry(nodes, 2);
    const GeneralGapLaw g2(cherry, rho);
    const PairGapLaw pair(rho, t);
    std::vector<std::size_t> dense2(4, 0);
    for (std::size_t a = 0; a <= kMax; ++a)
      for (std::size_t b = 0; b <= kMax; ++b) {
        dense2[1] = a;
        dense2[2] = b;
        worst = std::max(worst, rel(g2.log_pmf(dense2), pair.log_pmf(a, b)));
      }

    std::vector<UltrametricTree::Node> n3(5);
    n3[0].label = "A";
    n3[1].label = "B";
    n3[2].label = "C";
    n3[0].length = n3[1].length = tp;
    n3[2].length = t;
    n3[3].children = {0, 1};
    n3[3].length = t - tp;
    n3[0].parent = n3[1].parent = 3;
    n3[4].children = {3, 2};
    n3[3].parent = n3[2].parent = 4;
    if (t - tp <= 0.0) continue;
    const UltrametricTree fig(n3, 4);
    const GeneralGapLaw g3(fig, rho);
    const TripleGapLaw triple(rho, t, tp);
    std::vector<std::size_t> dense3(8, 0);
    TripleCounts c{};
    for (c[0] = 0; c[0] <= kMax; ++c[0])
      for (c[1] = 0; c[1] <= kMax; ++c[1])
        for (c[2] = 0; c[2] <= kMax; ++c[2])
          for (c[3] = 0; c[3] <= kMax; ++c[3])
            for (c[4] = 0; c[4] <= kMax; ++c[4])
              for (c[5] = 0; c[5] <= kMax; ++c[5]) {
                dense3[0b001] = c[0];
                dense3[0b010] = c[1];
                dense3[0b100] = c[2];
                dense3[0b011] = c[3];
                dense3[0b101] = c[4];
                dense3[0b110] = c[5];
                worst = std::max(worst, rel(g3.log_pmf(dense3), triple.log_pmf(c)));
              }
  }

  double worst_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto tree = sample_coalescent(5, seed);
    const double rho = 0.1 + 0.2 * static_cast<double>(seed);
    const GeneralGapLaw law(tree, rho);
    double sum = law.p_all() + (1.0 - law.p_root());
    for (std::uint64_t k = 1; k < 31; ++k) sum += law.p_subset(LeafSet{k});
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return {worst <= 1e-12 && worst_sum <= 1e-12,
          fmt("max relative log-pmf gap = %.3g (5 settings, counts <= 8); max |sum p_K + p_all + q(r) - 1| = %.3g "
              "(20 trees)",
              worst, worst_sum)};
}

// --- 5 -------------------------------------------------------------------

// Root of the score d/drho of the pair log-likelihood, by bisection after a
// grid scan; the score is written out directly from the log-likelihood.
double pair_mle_oracle(std::size_t m, std::size_t d, double t) {
  auto score = [&](double rho) {
    const double p = std::exp(-rho * t);
    const double dp = (m - 1.0) * (1.0 / p + 1.0 / (2.0 - p)) + d * (1.0 / (2.0 - p) - 1.0 / (1.0 - p));
    return -t * p * dp;
  };
  if (score(1e-12) <= 0) return 0.0;  // likelihood decreasing: argmax on the boundary
  const double guess =
      oracle::grid_argmax([&](double rho) { return pair_conditional_loglik(m, d, rho, t); }, 1e-9, 30.0 / t, 3);
  double lo = std::max(1e-12, guess * 0.5), hi = guess * 2.0 + 1e-6;
  while (score(lo) < 0) lo *= 0.5;
  while (score(hi) > 0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (score(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome mle_correctness() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> m_dist(2, 50), d_dist(0, 200);
  std::uniform_real_distribution<double> t_dist(0.1, 5.0);
  double worst = 0.0, worst_nb_ulps = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = m_dist(rng), d = d_dist(rng);
    const double t = t_dist(rng);
    const double closed = estimate_rho_pair(m, d, t).rho_hat;
    worst = std::max(worst, std::abs(closed - pair_mle_oracle(m, d, t)));
    // 1 / (1 + D / (2(M-1))) and r / (r + D) agree up to evaluation order.
    const double nb = negative_binomial_p_mle(2 * (m - 1), d), star = pair_p_star(m, d);
    worst_nb_ulps = std::max(worst_nb_ulps, std::abs(nb - star) / (star * std::numeric_limits<double>::epsilon()));
  }
  return {worst <= 1e-7 && worst_nb_ulps <= 4.0,
          fmt("max |rho* - numeric argmax| = %.3g over 100 (M, D, T); negative-binomial p-MLE vs p*: %.1f ulp",
              worst, worst_nb_ulps)};
}

// --- 6 -------------------------------------------------------------------

Outcome fig1_replication(std::size_t n, std::vector<double> grid, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.sample_size = n;
  cfg.rho_grid = std::move(grid);
  cfg.replicates = 1000;
  cfg.seed = seed;
  const auto summary = summarize_fig1(run_fig1(cfg));
  bool pass = true;
  std::string detail;
  for (const auto& s : summary) {
    const bool ok = !s.quantiles.empty() && s.quantiles[2] >= 0.85 && s.quantiles[2] <= 1.15 &&
                    s.quantiles[1] <= 1.0 && s.quantiles[3] >= 1.0;
    pass = pass && ok;
    detail += fmt("rho=%g median %.3f IQR [%.3f, %.3f]", s.rho, s.quantiles.empty() ? NAN : s.quantiles[2],
                  s.quantiles.empty() ? NAN : s.quantiles[1], s.quantiles.empty() ? NAN : s.quantiles[3]) +
              " skipped " + std::to_string(s.skipped) + "; ";
  }
  return {pass, detail};
}

// --- 7 -------------------------------------------------------------------

struct MeanM {
  double mean, se;
};

MeanM mean_shared(std::size_t n, double rho, std::size_t replicates, std::uint64_t seed) {
  std::vector<double> m(replicates);
  parallel_for(replicates, worker_count(), [&](std::size_t i) {
    const auto rep = simulate_coalescent_replicate(n, {100.0 * rho, rho}, mix_seed(seed, i));
    m[i] = static_cast<double>(gap_decomposition(rep.arrays).shared());
  });
  double sum = 0.0, sq = 0.0;
  for (double x : m) sum += x;
  const double mean = sum / replicates;
  for (double x : m) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / (replicates - 1.0) / replicates)};
}

Outcome moment_check(const MeanM& got, double expected) {
  const double z = (got.mean - expected) / got.se;
  return {std::abs(z) <= 3.0, fmt("mean M = %.3f (SE %.3f) vs %.3f, z = %.2f", got.mean, got.se, expected, z)};
}

// --- 8 -------------------------------------------------------------------

std::string fig1_bytes(std::size_t n, const char* threads) {
  ::setenv("SPACERLOSS_THREADS", threads, 1);
  ExperimentConfig cfg;
  cfg.sample_size = n;
  cfg.rho_grid = {0.5, 1.0, 2.0};
  cfg.replicates = 300;
  cfg.seed = 808;
  std::ostringstream out;
  write_fig1_csv(out, run_fig1(cfg));
  write_fig1_summary(out, summarize_fig1(run_fig1(cfg)));
  return out.str();
}

Outcome determinism() {
  const char* saved = std::getenv("SPACERLOSS_THREADS");
  const std::string saved_value = saved ? saved : "";
  bool same = true;
  std::size_t bytes = 0;
  for (std::size_t n : {2, 3}) {
    const auto a = fig1_bytes(n, "1");
    const auto b = fig1_bytes(n, "1");
    const auto c = fig1_bytes(n, "4");
    same = same && a == b && a == c;
    bytes += a.size();
  }
  if (saved)
    ::setenv("SPACERLOSS_THREADS", saved_value.c_str(), 1);
  else
    ::unsetenv("SPACERLOSS_THREADS");
  return {same, std::to_string(bytes) + " bytes compared across repeat runs and SPACERLOSS_THREADS=1 vs 4"};
}

}  // namespace

int main() {
  std::printf("spacerloss acceptance suite\n");
  report("1", "gap pmf normalization", pmf_normalization, 5.0);
  report("2", "two-leaf simulator vs gap law", pair_agreement, 120.0);
  report("3", "three-leaf simulator vs gap law", triple_agreement);
  report("4", "general-n law reduces to n = 2, 3", general_reduction);
  report("5", "closed-form pair MLE", mle_correctness);
  const auto t6 = std::chrono::steady_clock::now();
  report("6a", "simulation study n = 2", [] { return fig1_replication(2, {0.25, 0.5, 1.0, 2.0}, 6001); });
  report("6b", "simulation study n = 3", [] { return fig1_replication(3, {0.5, 1.0, 2.0}, 6002); });
  const double secs6 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t6).count();
  report("6c", "simulation study runtime", [&] { return Outcome{secs6 < 600.0, fmt("%.1f s for 6a + 6b", secs6)}; });

  const double rho = 0.5, theta = 100.0 * rho;
  const auto m2 = mean_shared(2, rho, 10000, 7002);
  const auto m3 = mean_shared(3, rho, 10000, 7003);
  report("7a", "mean shared count n = 2", [&] { return moment_check(m2, theta / (rho * (1 + 2 * rho))); });
  report("7b", "mean shared count n = 3 (stated formula)",
         [&] { return moment_check(m3, theta / (rho * (1 + 2 * rho) * (2 + 2 * rho))); });
  report("7c", "mean shared count n = 3 (exact coalescent value)",
         [&] { return moment_check(m3, theta / (rho * (1 + rho) * (1 + 2 * rho))); });
  report("8", "replicate-fig1 determinism", determinism);

  std::printf("%d unexpected failure(s), %d known-unattainable failure(s)\n", failures, known_failures);
  return failures == 0 ? 0 : 1;
}
