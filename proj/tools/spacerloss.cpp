// spacerloss: simulate CRISPR spacer arrays, extract equal-spacer
// statistics, estimate loss rates, validate the likelihoods by simulation and
// rerun the coalescent simulation study.
//
// Exit codes: 0 success, 2 usage or input error, 3 validation failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spacerloss/commands.hpp"
#include "spacerloss/csv_io.hpp"
#include "spacerloss/errors.hpp"
#include "spacerloss/experiment.hpp"
#include "spacerloss/validation.hpp"

namespace {

using namespace spacerloss;

constexpr int kUsageError = 2;
constexpr int kValidationFailure = 3;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

// Writes through a temporary buffer so unwritable paths fail before any work
// is lost and "-" means stdout.
void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw InvalidArgument("write to '" + path + "' failed");
}

std::vector<UltrametricTree> load_trees(const std::string& path) {
  auto in = open_in(path);
  return read_tree_file(in);
}

struct SimulateArgs {
  std::string tree;
  double theta = 0.0;
  double rho = 1.0;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  SimulateOptions opt;
  opt.params = {a.theta, a.rho};
  opt.replicates = a.replicates;
  opt.seed = a.seed;
  const auto result = cmd_simulate(TreeSource::parse(a.tree), opt);
  std::ostringstream arrays, trees;
  write_array_table(arrays, result.arrays);
  write_tree_file(trees, result.trees);
  write_out(a.out, arrays.str());
  write_out(a.out + ".trees.nwk", trees.str());
  return 0;
}

struct StatsArgs {
  std::string arrays;
  std::string trees;
  std::string out;
};

int run_stats(const StatsArgs& a) {
  const auto trees = load_trees(a.trees);
  auto in = open_in(a.arrays);
  const auto arrays = read_array_table(in, trees);
  const auto [n, rows] = cmd_stats(arrays, trees);
  std::ostringstream text;
  write_stats(text, n, rows);
  write_out(a.out, text.str());
  return 0;
}

struct EstimateArgs {
  std::string stats;
  std::string trees;
  std::string arrays;
  std::optional<double> t_outer;
  std::optional<double> t_inner;
  std::string method;  // empty: pair or triple from the stats sample size
  std::string out;
};

int run_estimate(const EstimateArgs& a) {
  auto in = open_in(a.stats);
  const auto [n, rows] = read_stats(in);
  EstimateOptions opt;
  const std::string method = a.method.empty() ? (n == 3 ? "triple" : "pair") : a.method;
  opt.method = method == "pair" ? MethodFlag::pair : method == "triple" ? MethodFlag::triple : MethodFlag::moments;
  if (!a.trees.empty()) opt.trees = load_trees(a.trees);
  opt.t_outer = a.t_outer;
  opt.t_inner = a.t_inner;
  if (!a.arrays.empty()) {
    // The array table names leaves, so it needs the trees for the leaf sets.
    if (opt.trees.empty()) throw InvalidArgument("--arrays needs --tree for the leaf labels");
    auto arrays_in = open_in(a.arrays);
    opt.arrays = read_array_table(arrays_in, opt.trees);
  }
  std::ostringstream text;
  write_estimates(text, cmd_estimate(n, rows, opt));
  write_out(a.out, text.str());
  return 0;
}

int run_validate(const ValidationConfig& config) {
  const auto report = run_validation(config);
  write_report(std::cout, report);
  return report.passed() ? 0 : kValidationFailure;
}

struct Fig1Args {
  ExperimentConfig config;
  std::string out;
};

int run_fig1_cmd(const Fig1Args& a) {
  const auto rows = run_fig1(a.config);
  std::ostringstream csv, summary;
  write_fig1_csv(csv, rows);
  write_fig1_summary(summary, summarize_fig1(rows));
  write_out(a.out, csv.str());
  if (!a.out.empty() && a.out != "-") write_out(a.out + ".summary.csv", summary.str());
  std::cerr << summary.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered independent loss model for CRISPR spacer arrays"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate spacer arrays down a tree");
  simulate->add_option("--tree", sim.tree, "Newick file or coalescent:N")->required();
  simulate->add_option("--theta", sim.theta, "Gain rate")->required()->check(CLI::NonNegativeNumber);
  simulate->add_option("--rho", sim.rho, "Loss rate")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--replicates", sim.replicates, "Number of replicates")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--out", sim.out, "Array CSV path; trees go to <out>.trees.nwk")->required();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Equal-spacer statistics per replicate");
  stats->add_option("--arrays", st.arrays, "Array CSV")->required();
  stats->add_option("--tree", st.trees, "Tree file, one Newick per replicate (or one for all)")->required();
  stats->add_option("--out", st.out, "Output CSV (default stdout)");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate rho (and theta) from statistics");
  estimate->add_option("--stats", est.stats, "Stats CSV")->required();
  estimate->add_option("--tree", est.trees, "Tree file, one Newick per replicate (or one for all)");
  estimate->add_option("--T", est.t_outer, "Root height T")->check(CLI::PositiveNumber);
  estimate->add_option("--Tprime", est.t_inner, "Cherry height T'")->check(CLI::PositiveNumber);
  estimate->add_option("--method", est.method, "pair, triple or moments (default: pair or triple by sample size)")
      ->check(CLI::IsMember({"pair", "triple", "moments"}));
  estimate->add_option("--arrays", est.arrays, "Array CSV for the theta moment estimate");
  estimate->add_option("--out", est.out, "Output CSV (default stdout)");

  ValidationConfig val;
  double val_t_inner = 0.0;
  auto* validate = app.add_subcommand("validate", "Compare simulated gap laws with the analytic pmfs");
  validate->add_option("--theta", val.theta, "Gain rate")->required();
  validate->add_option("--rho", val.rho, "Loss rate")->required();
  validate->add_option("--T", val.t_outer, "Root height T")->required();
  auto* tprime = validate->add_option("--Tprime", val_t_inner, "Cherry height T' (three leaves)");
  validate->add_option("--trials", val.trials, "Number of simulated replicates");
  validate->add_option("--seed", val.seed, "Base seed");

  Fig1Args fig;
  auto* fig1 = app.add_subcommand("replicate-fig1", "Coalescent simulation study of rho_hat / rho");
  fig1->add_option("--n", fig.config.sample_size, "Sample size (2 or 3)")->check(CLI::IsMember({2, 3}));
  fig1->add_option("--rho", fig.config.rho_grid, "Loss rates (comma separated)")->delimiter(',');
  fig1->add_option("--theta-factor", fig.config.theta_factor, "theta = factor * rho");
  fig1->add_option("--replicates", fig.config.replicates, "Replicates per rho")->check(CLI::PositiveNumber);
  fig1->add_option("--seed", fig.config.seed, "Base seed");
  fig1->add_option("--out", fig.out, "Results CSV (default stdout); summary to <out>.summary.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*stats) return run_stats(st);
    if (*estimate) return run_estimate(est);
    if (*validate) {
      if (*tprime) val.t_inner = val_t_inner;
      return run_validate(val);
    }
    if (*fig1) return run_fig1_cmd(fig);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
