#include "spacerloss/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_set>

#include "spacerloss/errors.hpp"

namespace spacerloss {

namespace {

using RawNodes = std::vector<UltrametricTree::Node>;

// Smallest leaf label in each subtree, used to fix child order.
std::vector<std::string> min_labels(const RawNodes& raw, NodeId root) {
  std::vector<std::string> out(raw.size());
  std::vector<NodeId> order;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    if (!raw[v].is_leaf()) {
      stack.push_back(raw[v].children[0]);
      stack.push_back(raw[v].children[1]);
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = raw[*it];
    out[*it] = n.is_leaf() ? n.label : std::min(out[n.children[0]], out[n.children[1]]);
  }
  return out;
}

}  // namespace

UltrametricTree::UltrametricTree(std::vector<Node> raw, NodeId root) {
  if (root >= raw.size()) throw InvalidArgument("tree root out of range");
  for (const auto& n : raw) {
    bool has0 = n.children[0] != kNoNode;
    bool has1 = n.children[1] != kNoNode;
    if (has0 != has1) throw InvalidArgument("tree is not binary: vertex with one child");
    for (NodeId c : n.children)
      if (c != kNoNode && c >= raw.size()) throw InvalidArgument("child id out of range");
  }
  if (raw[root].is_leaf()) throw InvalidArgument("tree needs at least two leaves");

  const auto mins = min_labels(raw, root);

  // Preorder renumbering with canonical child order.
  nodes_.reserve(raw.size());
  std::vector<std::pair<NodeId, NodeId>> stack{{root, kNoNode}};  // (raw id, new parent)
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto [r, parent] = stack.back();
    stack.pop_back();
    if (++visited > raw.size()) throw InvalidArgument("tree contains a cycle");
    auto id = static_cast<NodeId>(nodes_.size());
    Node n;
    n.parent = parent;
    n.label = raw[r].label;
    n.length = parent == kNoNode ? 0.0 : raw[r].length;
    if (parent != kNoNode) {
      auto& pc = nodes_[parent].children;
      (pc[0] == kNoNode ? pc[0] : pc[1]) = id;
    }
    nodes_.push_back(std::move(n));
    if (!raw[r].is_leaf()) {
      NodeId a = raw[r].children[0];
      NodeId b = raw[r].children[1];
      if (mins[b] < mins[a]) std::swap(a, b);
      // Push in reverse so `a` is visited first.
      stack.push_back({b, id});
      stack.push_back({a, id});
    }
  }

  std::unordered_set<std::string_view> seen;
  std::vector<double> root_distance(nodes_.size(), 0.0);
  for (NodeId v = 0; v < nodes_.size(); ++v) {
    auto& n = nodes_[v];
    if (v != 0) {
      if (!std::isfinite(n.length) || n.length <= 0.0)
        throw InvalidArgument("branch lengths must be positive and finite");
      root_distance[v] = root_distance[n.parent] + n.length;
    }
    if (n.is_leaf()) {
      if (n.label.empty()) throw InvalidArgument("leaf without label");
      if (!seen.insert(n.label).second) throw InvalidArgument("duplicate leaf label '" + n.label + "'");
      n.leaf_index = leaves_.size();
      leaves_.push_back(v);
    } else {
      n.label.clear();
    }
  }
  double lo = root_distance[leaves_.front()];
  double hi = lo;
  for (NodeId l : leaves_) {
    lo = std::min(lo, root_distance[l]);
    hi = std::max(hi, root_distance[l]);
  }
  if (hi - lo > kUltrametricTolerance * hi)
    throw InvalidArgument("tree is not ultrametric: root-to-leaf distances range over [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");

  for (NodeId v = static_cast<NodeId>(nodes_.size()); v-- > 0;) {
    auto& n = nodes_[v];
    if (n.is_leaf()) {
      n.height = 0.0;
      // Leaves past index 63 have no subset bit; subset operations reject such trees.
      n.leaves = n.leaf_index < 64 ? LeafSet::single(n.leaf_index) : LeafSet{};
      n.subtree_end = v + 1;
    } else {
      n.height = std::max(0.0, hi - root_distance[v]);
      n.leaves = nodes_[n.children[0]].leaves | nodes_[n.children[1]].leaves;
      n.subtree_end = nodes_[n.children[1]].subtree_end;
    }
  }
  nodes_[0].height = hi;
}

std::vector<std::string> UltrametricTree::leaf_labels() const {
  std::vector<std::string> out;
  out.reserve(leaves_.size());
  for (NodeId l : leaves_) out.push_back(nodes_[l].label);
  return out;
}

double UltrametricTree::total_length() const {
  double s = 0.0;
  for (const auto& n : nodes_) s += n.length;
  return s;
}

std::optional<std::size_t> UltrametricTree::find_leaf(std::string_view label) const {
  for (std::size_t i = 0; i < leaves_.size(); ++i)
    if (nodes_[leaves_[i]].label == label) return i;
  return std::nullopt;
}

LeafSet UltrametricTree::subset(std::span<const std::string> labels) const {
  LeafSet s;
  for (const auto& l : labels) {
    auto idx = find_leaf(l);
    if (!idx) throw InvalidArgument("unknown leaf label '" + l + "'");
    s |= LeafSet::single(*idx);
  }
  return s;
}

LeafSet UltrametricTree::subset(std::initializer_list<std::string_view> labels) const {
  std::vector<std::string> v(labels.begin(), labels.end());
  return subset(v);
}

std::vector<std::string> UltrametricTree::labels_of(LeafSet set) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < leaves_.size(); ++i)
    if (set.contains(i)) out.push_back(nodes_[leaves_[i]].label);
  return out;
}

bool UltrametricTree::is_ancestor(NodeId ancestor, NodeId node) const {
  return node >= ancestor && node < nodes_.at(ancestor).subtree_end;
}

// ---------------------------------------------------------------------------
// Newick

namespace {

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  UltrametricTree parse() {
    skip_space();
    NodeId root = parse_subtree(true);
    skip_space();
    if (peek() != ';') fail("expected ';'");
    ++pos_;
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after ';'");
    try {
      return UltrametricTree(std::move(nodes_), root);
    } catch (const InvalidArgument& e) {
      throw NewickError(e.what(), text_.size());
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<UltrametricTree::Node> nodes_;

  [[noreturn]] void fail(const std::string& msg) const { throw NewickError(msg, pos_); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        auto end = text_.find(']', pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 1;
      } else {
        break;
      }
    }
  }

  static bool is_label_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' &&
           c != ':' && c != ';' && c != '[' && c != ']' && c != '\'';
  }

  std::string parse_label() {
    skip_space();
    std::string out;
    if (peek() == '\'') {
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated quoted label");
        char c = text_[pos_++];
        if (c == '\'') {
          if (peek() == '\'') {
            out.push_back('\'');
            ++pos_;
          } else {
            break;
          }
        } else {
          out.push_back(c);
        }
      }
      return out;
    }
    while (pos_ < text_.size() && is_label_char(text_[pos_])) out.push_back(text_[pos_++]);
    return out;
  }

  std::optional<double> parse_length() {
    skip_space();
    if (peek() != ':') return std::nullopt;
    ++pos_;
    skip_space();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr == begin) fail("malformed branch length");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  NodeId parse_subtree(bool is_root) {
    skip_space();
    const std::size_t start = pos_;
    UltrametricTree::Node node;
    if (peek() == '(') {
      ++pos_;
      std::vector<NodeId> kids;
      while (true) {
        kids.push_back(parse_subtree(false));
        skip_space();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
      if (kids.size() != 2)
        throw NewickError("non-binary vertex with " + std::to_string(kids.size()) + " children", start);
      node.children = {kids[0], kids[1]};
      parse_label();  // internal labels are accepted and dropped
    } else {
      node.label = parse_label();
      if (node.label.empty()) fail("expected leaf label or '('");
    }
    auto len = parse_length();
    if (!is_root) {
      if (!len) fail("missing branch length");
      node.length = *len;
    }
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
  }
};

std::string format_length(double x) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string quote_label(const std::string& label) {
  bool plain = std::all_of(label.begin(), label.end(), [](char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && std::string_view("(),:;[]'").find(c) ==
                                                               std::string_view::npos;
  });
  if (plain) return label;
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

void write_newick(const UltrametricTree& tree, NodeId v, std::string& out) {
  const auto& n = tree.node(v);
  if (n.is_leaf()) {
    out += quote_label(n.label);
  } else {
    out.push_back('(');
    write_newick(tree, n.children[0], out);
    out.push_back(',');
    write_newick(tree, n.children[1], out);
    out.push_back(')');
  }
  if (v != tree.root()) {
    out.push_back(':');
    out += format_length(n.length);
  }
}

}  // namespace

UltrametricTree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

std::string to_newick(const UltrametricTree& tree) {
  std::string out;
  write_newick(tree, tree.root(), out);
  out.push_back(';');
  return out;
}

// ---------------------------------------------------------------------------
// Coalescent

UltrametricTree sample_coalescent(std::size_t n, Rng& rng) {
  if (n < 2) throw InvalidArgument("coalescent sample size must be at least 2");
  std::vector<UltrametricTree::Node> raw(n);
  std::vector<double> height(n, 0.0);
  std::vector<NodeId> active(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i].label = "s" + std::to_string(i + 1);
    active[i] = static_cast<NodeId>(i);
  }
  double t = 0.0;
  while (active.size() > 1) {
    const double k = static_cast<double>(active.size());
    t += std::exponential_distribution<double>(k * (k - 1.0) / 2.0)(rng);
    auto i = std::uniform_int_distribution<std::size_t>(0, active.size() - 1)(rng);
    auto j = std::uniform_int_distribution<std::size_t>(0, active.size() - 2)(rng);
    if (j >= i) ++j;
    UltrametricTree::Node parent;
    parent.children = {active[i], active[j]};
    raw[active[i]].length = t - height[active[i]];
    raw[active[j]].length = t - height[active[j]];
    raw.push_back(std::move(parent));
    height.push_back(t);
    auto id = static_cast<NodeId>(raw.size() - 1);
    if (i > j) std::swap(i, j);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(j));
    active[i] = id;
  }
  return UltrametricTree(std::move(raw), active.front());
}

UltrametricTree sample_coalescent(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_coalescent(n, rng);
}

// ---------------------------------------------------------------------------
// Geometry

NodeId mrca(const UltrametricTree& tree, LeafSet subset) {
  if (subset.empty()) throw InvalidArgument("mrca of an empty leaf set");
  if (!subset.subset_of(tree.all_leaves())) throw InvalidArgument("leaf set contains unknown leaves");
  NodeId v = tree.leaf(subset.lowest());
  while (!subset.subset_of(tree.node(v).leaves)) v = tree.node(v).parent;
  return v;
}

double spanning_length(const UltrametricTree& tree, NodeId v, LeafSet subset) {
  if (!subset.subset_of(tree.node(v).leaves))
    throw InvalidArgument("vertex is not ancestral to every leaf of the subset");
  const auto end = tree.node(v).subtree_end;
  double total = 0.0;
  for (NodeId u = v + 1; u < end; ++u)
    if (tree.node(u).leaves.intersects(subset)) total += tree.node(u).length;
  return total;
}

SurvivalTable::SurvivalTable(const UltrametricTree& tree, double rho)
    : rho_(rho), p_(tree.node_count(), 1.0), edge_p_(tree.node_count(), 1.0) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("loss rate must be positive");
  for (NodeId v = static_cast<NodeId>(tree.node_count()); v-- > 0;) {
    const auto& n = tree.node(v);
    if (!n.is_leaf()) {
      p_[v] = 1.0 - edge_q(n.children[0]) * edge_q(n.children[1]);
    }
    edge_p_[v] = p_[v] * std::exp(-rho * n.length);
  }
}

SurvivalTable survival(const UltrametricTree& tree, double rho) { return SurvivalTable(tree, rho); }

double p_exact_subset(const UltrametricTree& tree, const SurvivalTable& table, NodeId v,
                      LeafSet subset) {
  if (subset.empty()) throw InvalidArgument("exact-subset probability of an empty set");
  const double kept = std::exp(-table.rho() * spanning_length(tree, v, subset));
  double lost = 1.0;
  const auto end = tree.node(v).subtree_end;
  for (NodeId u = v + 1; u < end; ++u) {
    const auto& n = tree.node(u);
    if (!n.leaves.intersects(subset) && tree.node(n.parent).leaves.intersects(subset))
      lost *= table.edge_q(u);
  }
  return kept * lost;
}

double p_exact_subset(const UltrametricTree& tree, double rho, NodeId v, LeafSet subset) {
  return p_exact_subset(tree, SurvivalTable(tree, rho), v, subset);
}

double poisson_mean_new(const UltrametricTree& tree, double theta, double rho, LeafSet subset) {
  if (!(theta >= 0.0)) throw InvalidArgument("gain rate must be nonnegative");
  const SurvivalTable table(tree, rho);
  double sum = 0.0;
  for (NodeId w = mrca(tree, subset); w != tree.root(); w = tree.node(w).parent)
    sum += -std::expm1(-rho * tree.node(w).length) * p_exact_subset(tree, table, w, subset);
  return theta / rho * sum;
}

TripleTopology triple_topology(const UltrametricTree& tree) {
  if (tree.leaf_count() != 3) throw InvalidArgument("triple topology needs exactly three leaves");
  const auto& root = tree.node(tree.root());
  NodeId cherry = root.children[0];
  NodeId outgroup = root.children[1];
  if (tree.node(cherry).is_leaf()) std::swap(cherry, outgroup);
  const auto& c = tree.node(cherry);
  return TripleTopology{{tree.node(c.children[0]).leaf_index, tree.node(c.children[1]).leaf_index,
                         tree.node(outgroup).leaf_index},
                        tree.depth(),
                        c.height};
}

}  // namespace spacerloss
