#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "probetopo/feeder.hpp"

namespace probetopo {

/// Tree over probing buses P and internal identifiable buses I. Each line
/// carries the effective resistance of the collapsed path it replaces.
///
/// The substation belongs to the grid only when it is itself identifiable.
/// Otherwise `top` is the shallowest bus of the reduced grid and
/// `top_resistance` the effective resistance from the substation to it.
struct ReducedGrid {
  std::vector<NodeId> nodes;     // ascending
  std::vector<Line> lines;       // parent -> child
  std::vector<NodeId> probing;   // ascending
  std::vector<NodeId> internal;  // ascending; labels are not meaningful
  NodeId top = kSubstation;
  double top_resistance = 0.0;
  double top_reactance = 0.0;

  bool is_probing(NodeId id) const;

  /// R^r restricted to `order` x `order`, computed from path sums in the
  /// reduced grid plus the substation-to-top resistance.
  Eigen::MatrixXd probing_block(std::span<const NodeId> order) const;

  /// The reduced grid as a feeder rooted at the substation, with a line
  /// (0, top) when top is not the substation.
  FeederGraph as_feeder() const;
};

/// Builds the reduced grid induced by `probing`. Throws LeafNotProbed when a
/// leaf is missing from `probing`, UnknownNode for IDs outside the feeder
/// and AssumptionViolated when the substation is listed as a probing bus.
ReducedGrid reduce_grid(const FeederGraph& g, std::span<const NodeId> probing);

}  // namespace probetopo
