#pragma once

#include <span>
#include <vector>

#include "probetopo/feeder.hpp"

namespace probetopo {

/// Level sets of one owner node, indexed by depth.
///
/// `sets[i]` is the level set at depth `first_depth + i`. Families built
/// from the true tree start at depth 0. Metered families recovered from
/// partial data are indexed by depth in the reduced grid and start at 1.
/// `values[i]`, when present, is R_{n,owner} shared by every n in `sets[i]`.
struct LevelSetFamily {
  NodeId owner = kSubstation;
  int first_depth = 0;
  std::vector<std::vector<NodeId>> sets;
  std::vector<double> values;
  bool metered = false;
  std::vector<NodeId> probing;

  int depth() const noexcept {
    return first_depth + static_cast<int>(sets.size()) - 1;
  }
  bool has_depth(int k) const noexcept {
    return k >= first_depth && k <= depth();
  }
  const std::vector<NodeId>& at_depth(int k) const;
  double value_at_depth(int k) const;

  /// Same owner, indexing and member sets; values are ignored.
  bool same_sets(const LevelSetFamily& other) const;
};

/// N_m^k for k = 0..d_m. For m = 0 this is the single set N_0^0 = N.
LevelSetFamily level_sets(const FeederGraph& g, NodeId m);

/// M_m^k = N_m^k ∩ P for k = 0..d_m, empty sets included.
LevelSetFamily metered_level_sets(const FeederGraph& g, NodeId m,
                                  std::span<const NodeId> probing);

/// Drops empty metered sets and re-indexes from depth 1, which is how the
/// sets appear when grouped from R_PP (depths counted in the reduced grid).
LevelSetFamily observed_metered_view(const LevelSetFamily& metered);

}  // namespace probetopo
