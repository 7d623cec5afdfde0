#pragma once

// Reference computations that share no code with the library: brute-force
// enumeration of edge fates, explicit die-roll series, and grid maximization.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

#include "spacerloss/tree.hpp"

namespace oracle {

using spacerloss::NodeId;
using spacerloss::UltrametricTree;

/// Probability of every exact leaf set reached by a spacer present at `v`,
/// by enumerating keep/lose for each edge below `v`. Key 0 is total loss.
inline std::map<std::uint64_t, double> edge_fates(const UltrametricTree& tree, double rho, NodeId v) {
  std::vector<NodeId> edges;
  for (NodeId u = 0; u < tree.node_count(); ++u)
    if (u != v && tree.is_ancestor(v, u)) edges.push_back(u);
  std::map<std::uint64_t, double> out;
  for (std::uint64_t state = 0; state < (std::uint64_t{1} << edges.size()); ++state) {
    double prob = 1.0;
    std::map<NodeId, bool> kept;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const bool k = (state >> i) & 1U;
      const double keep = std::exp(-rho * tree.node(edges[i]).length);
      prob *= k ? keep : 1.0 - keep;
      kept[edges[i]] = k;
    }
    std::uint64_t mask = 0;
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
      NodeId u = tree.leaf(l);
      if (!tree.is_ancestor(v, u)) continue;
      bool reach = true;
      for (; u != v; u = tree.node(u).parent) reach = reach && kept[u];
      if (reach) mask |= std::uint64_t{1} << l;
    }
    out[mask] += prob;
  }
  return out;
}

inline double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// Probability of the per-face counts `counts` before the first `stop` face,
/// with an unrecorded `skip` face, summed explicitly over the skip count.
inline double die_series(const std::vector<double>& faces, const std::vector<std::size_t>& counts, double skip,
                         double stop) {
  const std::size_t recorded = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  double base = 0.0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (counts[i] == 0) continue;
    if (faces[i] == 0.0) return 0.0;
    base += static_cast<double>(counts[i]) * std::log(faces[i]) - log_factorial(counts[i]);
  }
  base += std::log(stop);
  double total = 0.0;
  for (std::size_t c = 0;; ++c) {
    const double term = std::exp(base + log_factorial(recorded + c) - log_factorial(c) +
                                 (c ? static_cast<double>(c) * std::log(skip) : 0.0));
    total += term;
    if (skip == 0.0 || (c > 10 && term < 1e-19 * total)) break;
    if (c > 200000) break;
  }
  return total;
}

/// Pair gap law from the four-faced die (1 only, 2 only, neither, both).
inline double pair_gap(std::size_t a, std::size_t b, double rho, double t) {
  const double e = std::exp(-rho * t);
  return die_series({e * (1 - e), e * (1 - e)}, {a, b}, (1 - e) * (1 - e), e * e);
}

/// Three-leaf per-roll face probabilities from the edge-fate enumeration on
/// ((A:T',B:T'):T-T',C:T), in the order {A, B, C, AB, AC, BC, none, all}.
inline std::vector<double> triple_faces(double rho, double t_outer, double t_inner) {
  const double e = std::exp(-rho * t_outer), ei = std::exp(-rho * t_inner), em = std::exp(-rho * (t_outer - t_inner));
  // Explicit products over the four edges: a (A), b (B), m (cherry stem), c (C).
  auto p = [&](bool a, bool b, bool c) {
    double total = 0.0;
    for (int m = 0; m < 2; ++m) {
      const double pm = m ? em : 1 - em;
      const double pa = m ? (a ? ei : 1 - ei) : (a ? 0.0 : 1.0);
      const double pb = m ? (b ? ei : 1 - ei) : (b ? 0.0 : 1.0);
      total += pm * pa * pb;
    }
    return total * (c ? e : 1 - e);
  };
  return {p(1, 0, 0), p(0, 1, 0), p(0, 0, 1), p(1, 1, 0), p(1, 0, 1), p(0, 1, 1), p(0, 0, 0), p(1, 1, 1)};
}

inline double triple_gap(const std::array<std::size_t, 6>& counts, double rho, double t_outer, double t_inner) {
  const auto f = triple_faces(rho, t_outer, t_inner);
  return die_series({f[0], f[1], f[2], f[3], f[4], f[5]}, {counts.begin(), counts.end()}, f[6], f[7]);
}

/// Maximizer of `fn` on a uniform grid refined around the best point.
inline double grid_argmax(const std::function<double(double)>& fn, double lo, double hi, int levels = 12) {
  double best = lo;
  for (int level = 0; level < levels; ++level) {
    constexpr int kPoints = 200;
    const double step = (hi - lo) / kPoints;
    double best_val = -INFINITY;
    for (int i = 0; i <= kPoints; ++i) {
      const double x = lo + i * step;
      const double y = fn(x);
      if (y > best_val) {
        best_val = y;
        best = x;
      }
    }
    lo = std::max(lo, best - 2 * step);
    hi = std::min(hi, best + 2 * step);
  }
  return best;
}

}  // namespace oracle
