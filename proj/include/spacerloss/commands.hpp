#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spacerloss/csv_io.hpp"
#include "spacerloss/process.hpp"
#include "spacerloss/tree.hpp"

namespace spacerloss {

// In-memory halves of the command-line subcommands. The executable only
// parses flags and moves text in and out of these.

/// "coalescent:N" or a Newick file holding one tree.
struct TreeSource {
  std::optional<std::size_t> coalescent_leaves;
  std::optional<UltrametricTree> fixed;

  static TreeSource parse(const std::string& text);
};

struct SimulateOptions {
  ModelParams params;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: worker_count()
};

struct SimulateOutput {
  std::vector<UltrametricTree> trees;  // one per replicate
  std::vector<LeafArrays> arrays;
};

/// Replicate r uses seed s = mix_seed(seed, r): the coalescent tree (if any)
/// from mix_seed(s, 1) and the arrays from mix_seed(s, 2).
SimulateOutput cmd_simulate(const TreeSource& source, const SimulateOptions& options);

/// Sample size (2 or 3) and one row per replicate.
std::pair<std::size_t, std::vector<StatsRow>> cmd_stats(const std::vector<LeafArrays>& arrays,
                                                         const std::vector<UltrametricTree>& trees);

enum class MethodFlag { pair, triple, moments };

struct EstimateOptions {
  MethodFlag method = MethodFlag::pair;
  /// Per-replicate trees (or one tree for all); alternative to t_outer/t_inner.
  std::vector<UltrametricTree> trees;
  std::optional<double> t_outer;
  std::optional<double> t_inner;
  /// Arrays for the theta moment estimate; required by `moments`.
  std::vector<LeafArrays> arrays;
};

/// Throws InvalidArgument when the method, sample size and time
/// information do not fit together.
std::vector<EstimateRow> cmd_estimate(std::size_t sample_size, const std::vector<StatsRow>& rows,
                                      const EstimateOptions& options);

}  // namespace spacerloss
