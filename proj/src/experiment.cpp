#include "spacerloss/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "spacerloss/csv_io.hpp"
#include "spacerloss/equal_spacers.hpp"
#include "spacerloss/errors.hpp"
#include "spacerloss/estimators.hpp"

namespace spacerloss {

std::size_t worker_count() {
  if (const char* env = std::getenv("SPACERLOSS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

Replicate simulate_coalescent_replicate(std::size_t sample_size, const ModelParams& params,
                                        std::uint64_t seed) {
  auto tree = sample_coalescent(sample_size, mix_seed(seed, 1));
  auto arrays = simulate_tree(tree, params, mix_seed(seed, 2));
  return {std::move(tree), std::move(arrays)};
}

void ExperimentConfig::validate() const {
  if (sample_size != 2 && sample_size != 3) throw InvalidArgument("experiment sample size must be 2 or 3");
  if (rho_grid.empty()) throw InvalidArgument("rho grid is empty");
  for (double rho : rho_grid)
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho grid values must be finite and > 0");
  if (!(theta_factor >= 0.0) || !std::isfinite(theta_factor)) throw InvalidArgument("theta factor must be >= 0");
  if (replicates < 1) throw InvalidArgument("replicate count must be >= 1");
}

namespace {

Fig1Row fig1_replicate(std::size_t sample_size, double rho, double theta, std::uint64_t seed) {
  const auto rep = simulate_coalescent_replicate(sample_size, {theta, rho}, seed);
  Fig1Row row;
  row.rho = rho;
  try {
    if (sample_size == 2) {
      const auto s = pair_stats(rep.arrays);
      if (!s.unequal) throw InsufficientData("M<2");
      row.rho_hat = estimate_rho_pair(s.shared, *s.unequal, rep.tree.depth()).rho_hat;
    } else {
      const auto topo = triple_topology(rep.tree);
      const auto s = triple_stats(rep.arrays, topo.order);
      if (!s.d) throw InsufficientData("M<2");
      row.rho_hat = estimate_rho_triple(s.shared, *s.d, topo.t_outer, topo.t_inner).rho_hat;
    }
  } catch (const InsufficientData& e) {
    row.skipped_reason = e.what();
  }
  return row;
}

}  // namespace

std::vector<Fig1Row> run_fig1(const ExperimentConfig& config) {
  config.validate();
  const std::size_t per_rho = config.replicates;
  std::vector<Fig1Row> rows(config.rho_grid.size() * per_rho);
  parallel_for(rows.size(), config.threads ? config.threads : worker_count(), [&](std::size_t k) {
    const std::size_t j = k / per_rho;
    const std::size_t i = k % per_rho;
    const double rho = config.rho_grid[j];
    rows[k] = fig1_replicate(config.sample_size, rho, config.theta_factor * rho,
                             mix_seed(mix_seed(config.seed, j), i));
    rows[k].replicate = i;
  });
  return rows;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("quantile probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<Fig1Summary> summarize_fig1(const std::vector<Fig1Row>& rows) {
  std::vector<Fig1Summary> out;
  std::vector<std::vector<double>> ratios;
  for (const auto& row : rows) {
    if (out.empty() || out.back().rho != row.rho) {
      out.push_back({row.rho, 0, 0, {}});
      ratios.emplace_back();
    }
    if (row.rho_hat) {
      ++out.back().estimated;
      ratios.back().push_back(row.ratio());
    } else {
      ++out.back().skipped;
    }
  }
  for (std::size_t j = 0; j < out.size(); ++j) {
    auto& r = ratios[j];
    if (r.empty()) continue;
    std::sort(r.begin(), r.end());
    for (double p : kFig1Probs) out[j].quantiles.push_back(quantile_sorted(r, p));
  }
  return out;
}

void write_fig1_csv(std::ostream& out, const std::vector<Fig1Row>& rows) {
  out << "rho,replicate,rho_hat,ratio,skipped\n";
  for (const auto& row : rows) {
    out << format_double(row.rho) << ',' << row.replicate << ',';
    if (row.rho_hat)
      out << format_double(*row.rho_hat) << ',' << format_double(row.ratio()) << ",false\n";
    else
      out << ",,true\n";
  }
}

void write_fig1_summary(std::ostream& out, const std::vector<Fig1Summary>& summary) {
  out << "rho,estimated,skipped,q025,q25,q50,q75,q975\n";
  for (const auto& s : summary) {
    out << format_double(s.rho) << ',' << s.estimated << ',' << s.skipped;
    for (std::size_t i = 0; i < kFig1Probs.size(); ++i)
      out << ',' << (s.quantiles.empty() ? std::string{} : format_double(s.quantiles[i]));
    out << '\n';
  }
}

}  // namespace spacerloss
