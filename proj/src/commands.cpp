#include "spacerloss/commands.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spacerloss/equal_spacers.hpp"
#include "spacerloss/errors.hpp"
#include "spacerloss/estimators.hpp"
#include "spacerloss/experiment.hpp"

namespace spacerloss {

TreeSource TreeSource::parse(const std::string& text) {
  TreeSource out;
  constexpr std::string_view prefix = "coalescent:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string digits = text.substr(prefix.size());
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || n < 2)
      throw InvalidArgument("tree source 'coalescent:N' needs an integer N >= 2");
    out.coalescent_leaves = n;
    return out;
  }
  std::ifstream in(text);
  if (!in) throw InvalidArgument("cannot open tree file '" + text + "'");
  auto trees = read_tree_file(in);
  if (trees.size() != 1) throw InvalidArgument("tree file '" + text + "' must hold exactly one tree");
  out.fixed = std::move(trees.front());
  return out;
}

SimulateOutput cmd_simulate(const TreeSource& source, const SimulateOptions& options) {
  options.params.validate();
  if (!source.coalescent_leaves && !source.fixed) throw InvalidArgument("no tree source");
  std::vector<std::optional<Replicate>> reps(options.replicates);
  parallel_for(reps.size(), options.threads ? options.threads : worker_count(), [&](std::size_t r) {
    const auto seed = mix_seed(options.seed, r);
    if (source.coalescent_leaves)
      reps[r] = simulate_coalescent_replicate(*source.coalescent_leaves, options.params, seed);
    else
      reps[r] = Replicate{*source.fixed, simulate_tree(*source.fixed, options.params, mix_seed(seed, 2))};
  });
  SimulateOutput out;
  for (auto& rep : reps) {
    out.trees.push_back(std::move(rep->tree));
    out.arrays.push_back(std::move(rep->arrays));
  }
  return out;
}

namespace {

const UltrametricTree& tree_for(const std::vector<UltrametricTree>& trees, std::size_t r) {
  if (trees.size() == 1) return trees.front();
  if (r >= trees.size()) throw InvalidArgument("no tree for replicate " + std::to_string(r));
  return trees[r];
}

}  // namespace

std::pair<std::size_t, std::vector<StatsRow>> cmd_stats(const std::vector<LeafArrays>& arrays,
                                                         const std::vector<UltrametricTree>& trees) {
  if (trees.empty()) throw InvalidArgument("stats need a tree file");
  const std::size_t n = trees.front().leaf_count();
  if (n != 2 && n != 3) throw InvalidArgument("stats support trees with 2 or 3 leaves");
  std::vector<StatsRow> rows;
  for (std::size_t r = 0; r < arrays.size(); ++r) {
    const auto& tree = tree_for(trees, r);
    if (tree.leaf_count() != n || arrays[r].size() != n || arrays[r].labels != tree.leaf_labels())
      throw InvalidArgument("replicate " + std::to_string(r) + ": leaves differ between arrays and tree");
    StatsRow row;
    row.replicate = r;
    if (n == 2) {
      const auto s = pair_stats(arrays[r]);
      row.shared = s.shared;
      if (s.unequal) row.unequal = {*s.unequal};
    } else {
      const auto s = triple_stats(arrays[r], triple_topology(tree).order);
      row.shared = s.shared;
      if (s.d) row.unequal.assign(s.d->begin(), s.d->end());
    }
    rows.push_back(std::move(row));
  }
  return {n, std::move(rows)};
}

std::vector<EstimateRow> cmd_estimate(std::size_t sample_size, const std::vector<StatsRow>& rows,
                                      const EstimateOptions& options) {
  if (options.method == MethodFlag::pair && sample_size != 2)
    throw InvalidArgument("--method pair needs two-leaf statistics");
  if (options.method == MethodFlag::triple && sample_size != 3)
    throw InvalidArgument("--method triple needs three-leaf statistics");
  if (options.method == MethodFlag::moments && options.arrays.empty())
    throw InvalidArgument("--method moments needs --arrays");
  const bool have_times = options.t_outer.has_value();
  if (!options.trees.empty() && have_times) throw InvalidArgument("give either a tree file or --T, not both");
  if (options.trees.empty()) {
    if (!have_times) throw InvalidArgument("estimation needs a tree file or --T");
    if (sample_size == 3 && !options.t_inner) throw InvalidArgument("three-leaf estimation needs --Tprime");
  }

  std::vector<EstimateRow> out;
  for (const auto& row : rows) {
    EstimateRow e;
    e.replicate = row.replicate;
    if (row.unequal.empty()) {
      e.skipped_reason = "M<2";
      out.push_back(std::move(e));
      continue;
    }
    EstimateResult res;
    if (sample_size == 2) {
      const double t = options.trees.empty() ? *options.t_outer : tree_for(options.trees, row.replicate).depth();
      res = estimate_rho_pair(row.shared, row.unequal[0], t);
    } else {
      double t_outer, t_inner;
      if (options.trees.empty()) {
        t_outer = *options.t_outer;
        t_inner = *options.t_inner;
      } else {
        const auto topo = triple_topology(tree_for(options.trees, row.replicate));
        t_outer = topo.t_outer;
        t_inner = topo.t_inner;
      }
      res = estimate_rho_triple(row.shared, {row.unequal[0], row.unequal[1], row.unequal[2], row.unequal[3]},
                                t_outer, t_inner);
    }
    e.rho_hat = res.rho_hat;
    e.loglik = res.loglik;
    e.boundary = res.diagnostics.boundary;
    if (!options.arrays.empty()) {
      if (row.replicate >= options.arrays.size())
        throw InvalidArgument("no arrays for replicate " + std::to_string(row.replicate));
      if (res.rho_hat > 0.0) e.theta_hat = estimate_theta_moment(res.rho_hat, options.arrays[row.replicate]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace spacerloss
