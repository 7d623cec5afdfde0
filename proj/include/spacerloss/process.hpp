#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spacerloss/random.hpp"
#include "spacerloss/tree.hpp"

namespace spacerloss {

/// Gain rate theta (insertions per unit time at the leader end) and loss
/// rate rho (per spacer per unit time).
struct ModelParams {
  double theta = 0.0;
  double rho = 1.0;

  /// Throws InvalidArgument unless theta >= 0, rho > 0 and theta/rho is finite.
  void validate() const;
  double equilibrium_mean() const { return theta / rho; }
};

/// Opaque spacer identity. Only equality and array order carry meaning.
using SpacerId = std::uint64_t;

/// Spacers in array order; index 0 is the leader end (most recent insertion).
using SpacerArray = std::vector<SpacerId>;

/// Hands out fresh spacer identities. Identities from different sources
/// never collide as long as their namespaces differ.
class SpacerIdSource {
 public:
  static constexpr unsigned kNamespaceShift = 40;

  explicit SpacerIdSource(std::uint64_t ns = 0) : next_(ns << kNamespaceShift) {}
  static SpacerIdSource starting_at(SpacerId first) {
    SpacerIdSource s;
    s.next_ = first;
    return s;
  }

  SpacerId next() { return next_++; }

 private:
  std::uint64_t next_ = 0;
};

/// Tree node on which a spacer simulated by `simulate_tree` was gained;
/// spacers of the root's equilibrium array map to the root.
inline NodeId spacer_origin(SpacerId id) {
  return static_cast<NodeId>((id >> SpacerIdSource::kNamespaceShift) - 1);
}

/// Arrays observed at the leaves of one simulated (or loaded) tree, indexed
/// by the tree's leaf index.
struct LeafArrays {
  std::vector<std::string> labels;
  std::vector<SpacerArray> arrays;
  std::uint64_t seed = 0;

  std::size_t size() const { return arrays.size(); }
  const SpacerArray& at(std::string_view label) const;
  double mean_length() const;
};

/// Evolves one lineage for `duration`: every spacer is kept independently
/// with probability exp(-rho * duration), and the surviving gains (a Poisson
/// number with mean theta/rho * (1 - exp(-rho * duration))) are prepended.
SpacerArray simulate_line(const SpacerArray& initial, const ModelParams& params, double duration,
                          Rng& rng, SpacerIdSource& ids);
SpacerArray simulate_line(const SpacerArray& initial, const ModelParams& params, double duration,
                          std::uint64_t seed);

/// Poisson(theta/rho) fresh spacers: the finite equilibrium of the process.
SpacerArray equilibrium_root(const ModelParams& params, Rng& rng, SpacerIdSource& ids);
SpacerArray equilibrium_root(const ModelParams& params, std::uint64_t seed);

/// Runs the process down the tree from an equilibrium root. The edge above
/// node v uses the stream mix_seed(seed, v + 1), the root array uses
/// mix_seed(seed, 0), and spacers gained on that edge live in namespace v + 1.
LeafArrays simulate_tree(const UltrametricTree& tree, const ModelParams& params, std::uint64_t seed);

}  // namespace spacerloss
