#include "spacerloss/process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spacerloss/errors.hpp"

namespace spacerloss {

void ModelParams::validate() const {
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidArgument("theta must be finite and >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be finite and > 0");
  if (!std::isfinite(theta / rho)) throw InvalidArgument("theta/rho must be finite");
}

const SpacerArray& LeafArrays::at(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return arrays[i];
  throw InvalidArgument("no array for leaf '" + std::string(label) + "'");
}

double LeafArrays::mean_length() const {
  if (arrays.empty()) return 0.0;
  std::size_t total = 0;
  for (const auto& a : arrays) total += a.size();
  return static_cast<double>(total) / static_cast<double>(arrays.size());
}

SpacerArray simulate_line(const SpacerArray& initial, const ModelParams& params, double duration,
                          Rng& rng, SpacerIdSource& ids) {
  params.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw InvalidArgument("duration must be >= 0");
  if (duration == 0.0) return initial;

  const double keep = std::exp(-params.rho * duration);
  const double gained_mean = params.theta / params.rho * -std::expm1(-params.rho * duration);
  const auto gained = gained_mean > 0.0
                          ? std::poisson_distribution<std::uint64_t>(gained_mean)(rng)
                          : std::uint64_t{0};

  SpacerArray out;
  out.reserve(gained + initial.size());
  for (std::uint64_t i = 0; i < gained; ++i) out.push_back(ids.next());
  // Later insertions sit closer to the leader end.
  std::reverse(out.begin(), out.end());
  std::bernoulli_distribution kept(keep);
  for (SpacerId s : initial)
    if (kept(rng)) out.push_back(s);
  return out;
}

SpacerArray simulate_line(const SpacerArray& initial, const ModelParams& params, double duration,
                          std::uint64_t seed) {
  Rng rng(seed);
  SpacerId first = initial.empty() ? 0 : *std::max_element(initial.begin(), initial.end()) + 1;
  auto ids = SpacerIdSource::starting_at(first);
  return simulate_line(initial, params, duration, rng, ids);
}

SpacerArray equilibrium_root(const ModelParams& params, Rng& rng, SpacerIdSource& ids) {
  params.validate();
  const double mean = params.equilibrium_mean();
  const auto n = mean > 0.0 ? std::poisson_distribution<std::uint64_t>(mean)(rng) : std::uint64_t{0};
  SpacerArray out(n);
  for (auto& s : out) s = ids.next();
  return out;
}

SpacerArray equilibrium_root(const ModelParams& params, std::uint64_t seed) {
  Rng rng(seed);
  SpacerIdSource ids;
  return equilibrium_root(params, rng, ids);
}

LeafArrays simulate_tree(const UltrametricTree& tree, const ModelParams& params, std::uint64_t seed) {
  params.validate();
  std::vector<SpacerArray> at_node(tree.node_count());
  {
    Rng rng(mix_seed(seed, 0));
    SpacerIdSource ids(tree.root() + 1);
    at_node[tree.root()] = equilibrium_root(params, rng, ids);
  }
  // Preorder ids: parents are always finished before their children.
  for (NodeId v = 1; v < tree.node_count(); ++v) {
    const auto& n = tree.node(v);
    Rng rng(mix_seed(seed, std::uint64_t{v} + 1));
    SpacerIdSource ids(std::uint64_t{v} + 1);
    at_node[v] = simulate_line(at_node[n.parent], params, n.length, rng, ids);
    // Internal arrays are dropped once both children have been derived.
    if (v == tree.node(n.parent).children[1]) SpacerArray{}.swap(at_node[n.parent]);
  }
  LeafArrays out;
  out.seed = seed;
  out.labels = tree.leaf_labels();
  out.arrays.reserve(tree.leaf_count());
  for (NodeId l : tree.leaves()) out.arrays.push_back(std::move(at_node[l]));
  return out;
}

}  // namespace spacerloss
