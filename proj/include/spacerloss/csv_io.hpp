#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spacerloss/process.hpp"
#include "spacerloss/tree.hpp"

namespace spacerloss {

/// Row-oriented text formats shared by the command-line tools.
///
///   arrays      replicate,leaf,position,spacer    (position 1 = leader end)
///   trees       one canonical Newick string per line, line i = replicate i
///   stats (n=2) replicate,M,D
///   stats (n=3) replicate,M,D1,D2,D3,D4
///   estimates   replicate,rho_hat,theta_hat,loglik,boundary,skipped_reason
///
/// Replicates are numbered from 0. Absent values are empty fields.

void write_array_table(std::ostream& out, const std::vector<LeafArrays>& replicates);

/// Reads an array table; `trees` supplies the leaf set of each replicate
/// (a single tree applies to every replicate). Leaves without rows get empty
/// arrays.
std::vector<LeafArrays> read_array_table(std::istream& in, const std::vector<UltrametricTree>& trees);

void write_tree_file(std::ostream& out, const std::vector<UltrametricTree>& trees);
std::vector<UltrametricTree> read_tree_file(std::istream& in);

struct StatsRow {
  std::size_t replicate = 0;
  std::size_t shared = 0;
  /// D (one entry) or D1..D4 (four entries); empty when M < 2.
  std::vector<std::size_t> unequal;
};

/// `sample_size` (2 or 3) picks the header.
void write_stats(std::ostream& out, std::size_t sample_size, const std::vector<StatsRow>& rows);
/// Returns the sample size detected from the header alongside the rows.
std::pair<std::size_t, std::vector<StatsRow>> read_stats(std::istream& in);

struct EstimateRow {
  std::size_t replicate = 0;
  std::optional<double> rho_hat;
  std::optional<double> theta_hat;
  std::optional<double> loglik;
  bool boundary = false;
  std::string skipped_reason;
};

void write_estimates(std::ostream& out, const std::vector<EstimateRow>& rows);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// Splits one CSV line on commas (no quoting; fields never contain commas).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace spacerloss
