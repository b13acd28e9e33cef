#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probetopo/level_sets.hpp"
#include "probetopo/reduced_grid.hpp"

namespace probetopo {

/// A recovered line and the level-set values its resistance came from.
struct RecoveredLine {
  NodeId parent = kSubstation;
  NodeId child = kSubstation;
  double r = 0.0;
  int depth = 0;                    // depth of `child` in the recursion
  std::vector<NodeId> witnesses;    // owners whose consecutive values were averaged
};

/// One visited state of the recursion.
struct RecursionStep {
  int depth = 0;
  std::vector<NodeId> members;
  NodeId parent = kSubstation;
  bool has_parent = false;
  NodeId node = kSubstation;
  bool synthetic = false;
};

struct RecoveryReport {
  Mode mode = Mode::Complete;
  std::vector<NodeId> probing;       // ascending
  NodeId top = kSubstation;
  double top_resistance = 0.0;       // substation to top; 0 in complete mode
  std::vector<RecoveredLine> lines;  // in recursion order
  std::vector<NodeId> internal;      // synthetic non-probing nodes (partial mode)
  std::vector<RecursionStep> trace;

  std::vector<NodeId> nodes() const;
  std::vector<Line> edge_list() const;  // x is NaN: reactances are not recovered
};

/// Recursive reconstruction of the whole feeder from complete-data level
/// sets of every probing bus. Requires every leaf to be probed.
///
/// Throws AmbiguousIntersection (message carries the recursion state),
/// AssumptionViolated, InconsistentLevelSets or EmptyPartition.
RecoveryReport recover_full(std::span<const LevelSetFamily> families,
                            std::span<const NodeId> probing);

/// Recursive reconstruction of the reduced grid from metered level sets
/// indexed by reduced-grid depth (first_depth == 1). Non-probing nodes get
/// fresh IDs above the largest probing ID.
///
/// Throws AssumptionViolated, InconsistentMeteredSets or EmptyPartition.
RecoveryReport recover_partial(std::span<const LevelSetFamily> families,
                               std::span<const NodeId> probing);

struct Comparison {
  bool topology_correct = false;
  /// Mean of |r_hat - r| / r over matched lines, when the topology matches.
  std::optional<double> resistance_mpe;
  std::size_t matched_lines = 0;
};

/// Complete mode: every label must agree. Throws LabelMismatch when a
/// probing bus of the report is not in the feeder.
Comparison compare_graphs(const RecoveryReport& recovered, const FeederGraph& truth);
/// Partial mode: isomorphism that fixes probing labels. Throws LabelMismatch
/// when the probing sets differ.
Comparison compare_graphs(const RecoveryReport& recovered, const ReducedGrid& truth);

/// R^r_PP of a recovered reduced grid in the given probing order.
Eigen::MatrixXd probing_block(const RecoveryReport& report, std::span<const NodeId> order);

}  // namespace probetopo
