#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "spacerloss/process.hpp"
#include "spacerloss/tree.hpp"

namespace spacerloss {

/// For each leaf of `subset`, the increasing 1-based positions of the
/// spacers present in every leaf of `subset` and in no other leaf.
struct EqualSpacerIndices {
  LeafSet subset;
  std::vector<std::size_t> leaves;                  // leaf indices in `subset`
  std::vector<std::vector<std::size_t>> positions;  // parallel to `leaves`

  const std::vector<std::size_t>& of(std::size_t leaf) const;
};

EqualSpacerIndices equal_indices(const LeafArrays& arrays, LeafSet subset);

/// Counts F_i^K of spacers lying strictly between the i-th and (i+1)-th
/// spacer shared by all leaves (gap 0 is the leader-side segment) that are
/// present in exactly the leaves of K. Only gaps 0..M-1 are recorded.
class GapDecomposition {
 public:
  GapDecomposition(std::size_t leaf_count, std::size_t shared);

  std::size_t leaf_count() const { return leaf_count_; }
  /// M, the number of spacers present in every leaf.
  std::size_t shared() const { return shared_; }
  std::size_t gap_count() const { return counts_.size(); }

  std::size_t count(std::size_t gap, LeafSet subset) const { return counts_.at(gap).at(subset.bits()); }
  void add(std::size_t gap, LeafSet subset) { ++counts_.at(gap).at(subset.bits()); }

  /// Σ_i F_i^K over gaps [first, last).
  std::size_t total(LeafSet subset, std::size_t first, std::size_t last) const;

 private:
  std::size_t leaf_count_;
  std::size_t shared_;
  std::vector<std::vector<std::size_t>> counts_;  // [gap][mask]
};

/// Dense masks cap the leaf count for gap decompositions.
inline constexpr std::size_t kMaxGapLeaves = 20;

GapDecomposition gap_decomposition(const LeafArrays& arrays);

/// Two-leaf summary. `unequal` is D, the number of spacers lying strictly
/// between the first and last shared spacer in either leaf
/// (V_M - V_1 + W_M - W_1 - 2(M-1)); absent when M < 2.
struct PairStats {
  std::size_t shared = 0;
  std::vector<std::size_t> v;  // 1-based positions of shared spacers in leaf 1
  std::vector<std::size_t> w;  // ... and in leaf 2
  std::optional<std::size_t> unequal;
};

PairStats pair_stats(const LeafArrays& arrays);

/// Three-leaf summary over interior gaps 1..M-1, with leaves ordered as
/// (cherry, cherry, outgroup):
///   D1 = F^{1} + F^{2},  D2 = F^{3},  D3 = F^{12},  D4 = F^{13} + F^{23}.
/// Absent when M < 2.
struct TripleStats {
  std::size_t shared = 0;
  std::optional<std::array<std::size_t, 4>> d;
};

/// Subsets of three leaves in the (cherry, cherry, outgroup) order.
struct TripleClasses {
  LeafSet f1, f2, f3, f12, f13, f23;
};
TripleClasses triple_classes(const std::array<std::size_t, 3>& order);

TripleStats triple_stats(const LeafArrays& arrays, const std::array<std::size_t, 3>& order);
TripleStats triple_stats(const GapDecomposition& gaps, const std::array<std::size_t, 3>& order);

}  // namespace spacerloss
