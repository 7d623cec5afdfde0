#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spacerloss/random.hpp"

namespace spacerloss {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Set of leaves, one bit per leaf index (leaf indices follow the tree's
/// canonical leaf order). Trees with more than 64 leaves cannot use subsets.
class LeafSet {
 public:
  constexpr LeafSet() = default;
  constexpr explicit LeafSet(std::uint64_t bits) : bits_(bits) {}

  static constexpr LeafSet single(std::size_t leaf) { return LeafSet{std::uint64_t{1} << leaf}; }
  static constexpr LeafSet first(std::size_t n) {
    return LeafSet{n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1};
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool contains(std::size_t leaf) const { return (bits_ >> leaf) & 1U; }
  constexpr bool subset_of(LeafSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool intersects(LeafSet other) const { return (bits_ & other.bits_) != 0; }
  /// Lowest leaf index in the set; undefined for the empty set.
  constexpr std::size_t lowest() const { return static_cast<std::size_t>(std::countr_zero(bits_)); }

  constexpr LeafSet operator|(LeafSet o) const { return LeafSet{bits_ | o.bits_}; }
  constexpr LeafSet operator&(LeafSet o) const { return LeafSet{bits_ & o.bits_}; }
  constexpr LeafSet& operator|=(LeafSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  constexpr auto operator<=>(const LeafSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Rooted binary ultrametric tree. Immutable once built; every constructor
/// path validates and canonicalizes (children ordered by smallest leaf label,
/// nodes numbered in preorder, root = 0).
class UltrametricTree {
 public:
  struct Node {
    NodeId parent = kNoNode;
    std::array<NodeId, 2> children{kNoNode, kNoNode};
    double length = 0.0;  // edge above this node; 0 at the root
    double height = 0.0;  // time before present (leaves at 0)
    std::string label;    // leaves only
    LeafSet leaves;
    std::size_t leaf_index = 0;  // leaves only
    NodeId subtree_end = 0;      // preorder: subtree of v is [v, subtree_end)

    bool is_leaf() const { return children[0] == kNoNode; }
  };

  /// Relative tolerance on root-to-leaf path lengths.
  static constexpr double kUltrametricTolerance = 1e-9;

  /// Raw node list with arbitrary ids; `root` indexes into `nodes`.
  /// Children, labels and lengths are read; other fields are recomputed.
  UltrametricTree(std::vector<Node> nodes, NodeId root);

  NodeId root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const { return leaves_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::span<const Node> nodes() const { return nodes_; }
  /// Leaf node ids indexed by leaf index.
  std::span<const NodeId> leaves() const { return leaves_; }
  NodeId leaf(std::size_t index) const { return leaves_.at(index); }
  const std::string& label(NodeId id) const { return nodes_.at(id).label; }
  std::vector<std::string> leaf_labels() const;

  /// Root height T (common root-to-leaf distance).
  double depth() const { return nodes_[0].height; }
  /// Sum of all branch lengths.
  double total_length() const;

  std::optional<std::size_t> find_leaf(std::string_view label) const;
  /// Leaf set of the given labels; throws InvalidArgument on unknown labels.
  LeafSet subset(std::span<const std::string> labels) const;
  LeafSet subset(std::initializer_list<std::string_view> labels) const;
  LeafSet all_leaves() const { return LeafSet::first(leaves_.size()); }
  /// Whether leaf subsets (64-bit masks) can address every leaf.
  bool supports_subsets() const { return leaves_.size() <= 64; }
  std::vector<std::string> labels_of(LeafSet set) const;

  /// True iff `ancestor` lies on the path from the root to `node` (inclusive).
  bool is_ancestor(NodeId ancestor, NodeId node) const;

 private:
  std::vector<Node> nodes_;
  std::vector<NodeId> leaves_;
};

UltrametricTree parse_newick(std::string_view text);
/// Canonical Newick: children in canonical order, lengths as the shortest
/// text that reads back exactly, no internal labels, no root length.
std::string to_newick(const UltrametricTree& tree);

/// Kingman coalescent with pairwise merger rate 1; leaves labeled s1..sn.
UltrametricTree sample_coalescent(std::size_t n, Rng& rng);
UltrametricTree sample_coalescent(std::size_t n, std::uint64_t seed);

/// Most recent common ancestor of a nonempty leaf set.
NodeId mrca(const UltrametricTree& tree, LeafSet subset);

/// Total edge length of the subtree spanned by the paths from `v` to each
/// leaf in `subset`. Throws unless `v` is ancestral to every leaf of `subset`.
double spanning_length(const UltrametricTree& tree, NodeId v, LeafSet subset);

/// Survival function evaluated at every vertex: p(v) is the probability that
/// a spacer present at v reaches at least one leaf above v.
class SurvivalTable {
 public:
  SurvivalTable(const UltrametricTree& tree, double rho);

  double rho() const { return rho_; }
  double p(NodeId v) const { return p_.at(v); }
  double q(NodeId v) const { return 1.0 - p_.at(v); }
  /// Probability that a spacer at the lower end of the edge above `v`
  /// reaches some leaf under `v`.
  double edge_p(NodeId v) const { return edge_p_.at(v); }
  /// Total-loss probability of the subtree hanging from the edge above `v`.
  double edge_q(NodeId v) const { return 1.0 - edge_p_.at(v); }

 private:
  double rho_;
  std::vector<double> p_;
  std::vector<double> edge_p_;
};

SurvivalTable survival(const UltrametricTree& tree, double rho);

/// Probability that a spacer present at `v` ends up in every leaf of
/// `subset` and in no other leaf. `subset` must be nonempty and below `v`.
double p_exact_subset(const UltrametricTree& tree, const SurvivalTable& table, NodeId v,
                      LeafSet subset);
double p_exact_subset(const UltrametricTree& tree, double rho, NodeId v, LeafSet subset);

/// Mean number of spacers gained after the root that end up shared by
/// exactly `subset`: (theta/rho) sum over w in (root, mrca] of
/// (1 - exp(-rho len(w))) p_exact_subset(w).
double poisson_mean_new(const UltrametricTree& tree, double theta, double rho, LeafSet subset);

/// Leaves of a three-leaf tree as (cherry, cherry, outgroup) with the root
/// height T and cherry height T'.
struct TripleTopology {
  std::array<std::size_t, 3> order;  // leaf indices f1, f2, f3
  double t_outer;                    // T
  double t_inner;                    // T'
};
TripleTopology triple_topology(const UltrametricTree& tree);

}  // namespace spacerloss
