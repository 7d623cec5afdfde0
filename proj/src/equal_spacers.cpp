#include "spacerloss/equal_spacers.hpp"

#include <unordered_map>

#include "spacerloss/errors.hpp"

namespace spacerloss {

namespace {

using Membership = std::unordered_map<SpacerId, std::uint64_t>;

Membership membership(const LeafArrays& arrays) {
  if (arrays.size() > 64) throw InvalidArgument("more than 64 leaves");
  Membership m;
  std::size_t total = 0;
  for (const auto& a : arrays.arrays) total += a.size();
  m.reserve(total);
  for (std::size_t leaf = 0; leaf < arrays.size(); ++leaf) {
    const std::uint64_t bit = std::uint64_t{1} << leaf;
    for (SpacerId s : arrays.arrays[leaf]) {
      auto& mask = m[s];
      if (mask & bit) throw InvalidArgument("spacer occurs twice in leaf '" + arrays.labels[leaf] + "'");
      mask |= bit;
    }
  }
  return m;
}

}  // namespace

const std::vector<std::size_t>& EqualSpacerIndices::of(std::size_t leaf) const {
  for (std::size_t i = 0; i < leaves.size(); ++i)
    if (leaves[i] == leaf) return positions[i];
  throw InvalidArgument("leaf not in subset");
}

EqualSpacerIndices equal_indices(const LeafArrays& arrays, LeafSet subset) {
  if (subset.empty()) throw InvalidArgument("equal spacer subset must be nonempty");
  if (!subset.subset_of(LeafSet::first(arrays.size()))) throw InvalidArgument("subset has unknown leaves");
  const auto m = membership(arrays);
  EqualSpacerIndices out;
  out.subset = subset;
  for (std::size_t leaf = 0; leaf < arrays.size(); ++leaf) {
    if (!subset.contains(leaf)) continue;
    out.leaves.push_back(leaf);
    auto& pos = out.positions.emplace_back();
    const auto& a = arrays.arrays[leaf];
    for (std::size_t i = 0; i < a.size(); ++i)
      if (m.at(a[i]) == subset.bits()) pos.push_back(i + 1);
  }
  return out;
}

GapDecomposition::GapDecomposition(std::size_t leaf_count, std::size_t shared)
    : leaf_count_(leaf_count),
      shared_(shared),
      counts_(shared, std::vector<std::size_t>(std::size_t{1} << leaf_count, 0)) {
  if (leaf_count > kMaxGapLeaves) throw InvalidArgument("too many leaves for a gap decomposition");
}

std::size_t GapDecomposition::total(LeafSet subset, std::size_t first, std::size_t last) const {
  std::size_t s = 0;
  for (std::size_t i = first; i < last && i < counts_.size(); ++i) s += counts_[i][subset.bits()];
  return s;
}

GapDecomposition gap_decomposition(const LeafArrays& arrays) {
  const std::size_t n = arrays.size();
  if (n < 2) throw InvalidArgument("gap decomposition needs at least two leaves");
  if (n > kMaxGapLeaves) throw InvalidArgument("too many leaves for a gap decomposition");
  const auto m = membership(arrays);
  const std::uint64_t all = LeafSet::first(n).bits();

  std::vector<SpacerId> shared_order;
  for (SpacerId s : arrays.arrays[0])
    if (m.at(s) == all) shared_order.push_back(s);
  const std::size_t shared = shared_order.size();
  GapDecomposition out(n, shared);

  // Gap index of each partially shared spacer as seen from every leaf that
  // carries it; order preservation makes these agree.
  std::unordered_map<SpacerId, std::size_t> seen_gap;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    std::size_t gap = 0;
    for (SpacerId s : arrays.arrays[leaf]) {
      const auto mask = m.at(s);
      if (mask == all) {
        if (shared_order[gap] != s) throw InvalidArgument("shared spacer order differs between leaves");
        ++gap;
        continue;
      }
      const LeafSet k{mask};
      if (k.lowest() == leaf) {
        seen_gap.emplace(s, gap);
        if (gap < shared) out.add(gap, k);
      } else if (auto it = seen_gap.find(s); it == seen_gap.end() || it->second != gap) {
        throw InvalidArgument("spacer order differs between leaves");
      }
    }
  }
  return out;
}

PairStats pair_stats(const LeafArrays& arrays) {
  if (arrays.size() != 2) throw InvalidArgument("pair statistics need exactly two leaves");
  const auto idx = equal_indices(arrays, LeafSet::first(2));
  PairStats out;
  out.v = idx.positions[0];
  out.w = idx.positions[1];
  out.shared = out.v.size();
  if (out.shared >= 2) {
    const std::size_t m = out.shared;
    out.unequal = (out.v.back() - out.v.front()) + (out.w.back() - out.w.front()) - 2 * (m - 1);
  }
  return out;
}

TripleClasses triple_classes(const std::array<std::size_t, 3>& order) {
  const auto a = LeafSet::single(order[0]);
  const auto b = LeafSet::single(order[1]);
  const auto c = LeafSet::single(order[2]);
  return {a, b, c, a | b, a | c, b | c};
}

TripleStats triple_stats(const GapDecomposition& gaps, const std::array<std::size_t, 3>& order) {
  if (gaps.leaf_count() != 3) throw InvalidArgument("triple statistics need exactly three leaves");
  const auto k = triple_classes(order);
  TripleStats out;
  out.shared = gaps.shared();
  if (out.shared >= 2) {
    const std::size_t m = out.shared;
    auto sum = [&](LeafSet s) { return gaps.total(s, 1, m); };
    out.d = std::array<std::size_t, 4>{sum(k.f1) + sum(k.f2), sum(k.f3), sum(k.f12),
                                       sum(k.f13) + sum(k.f23)};
  }
  return out;
}

TripleStats triple_stats(const LeafArrays& arrays, const std::array<std::size_t, 3>& order) {
  return triple_stats(gap_decomposition(arrays), order);
}

}  // namespace spacerloss
