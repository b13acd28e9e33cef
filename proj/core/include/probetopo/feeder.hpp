#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "probetopo/types.hpp"

namespace probetopo {

/// A line from `from` (parent) to `to` (child), impedance in per-unit.
struct Line {
  NodeId from = 0;
  NodeId to = 0;
  double r = 0.0;
  double x = 0.0;

  friend bool operator==(const Line&, const Line&) = default;
};

/// Radial feeder rooted at the substation (node 0). Immutable once built.
///
/// Depth is measured in lines from the substation, so the substation has
/// depth 0 and `ancestor_at(m, depth(m)) == m`.
class FeederGraph {
 public:
  /// Validates and builds a feeder from (parent, child, r, x) lines.
  /// Throws Error with CycleDetected, Disconnected, DuplicateNode,
  /// NonpositiveImpedance or MissingRoot.
  static FeederGraph build(std::vector<Line> lines);

  std::size_t size() const noexcept { return ids_.size(); }
  /// All node IDs in ascending order; the substation comes first.
  std::span<const NodeId> nodes() const noexcept { return ids_; }
  std::span<const Line> lines() const noexcept { return lines_; }

  bool contains(NodeId id) const noexcept { return index_.contains(id); }
  std::size_t index_of(NodeId id) const;

  /// Parent of a non-root node. Throws UnknownNode for the substation.
  NodeId parent(NodeId id) const;
  std::span<const NodeId> children(NodeId id) const;
  bool is_leaf(NodeId id) const { return children(id).empty() && id != kSubstation; }
  std::vector<NodeId> leaves() const;

  int depth(NodeId id) const;
  int tree_depth() const noexcept { return tree_depth_; }

  /// The k-depth ancestor of m, k in [0, depth(m)].
  NodeId ancestor_at(NodeId m, int k) const;
  /// Ancestors of m from the substation down to m itself.
  std::vector<NodeId> ancestors(NodeId m) const;
  /// Descendants of m in preorder, starting with m.
  std::vector<NodeId> descendants(NodeId m) const;
  /// True when a lies on the path from the substation to m (a == m included).
  bool is_ancestor(NodeId a, NodeId m) const;
  NodeId common_ancestor(NodeId m, NodeId n) const;

  /// Resistance/reactance of the line connecting `child` to its parent.
  double line_resistance(NodeId child) const;
  double line_reactance(NodeId child) const;
  /// Sum of line resistances from the substation to m.
  double resistance_to_root(NodeId m) const;
  double reactance_to_root(NodeId m) const;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t checked(NodeId id) const;

  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<int> depth_;
  std::vector<double> r_;
  std::vector<double> x_;
  std::vector<double> root_r_;
  std::vector<double> root_x_;
  std::vector<std::size_t> enter_;
  std::vector<std::size_t> exit_;
  std::vector<Line> lines_;
  int tree_depth_ = 0;
};

inline FeederGraph build_feeder(std::vector<Line> lines) {
  return FeederGraph::build(std::move(lines));
}

/// Ancestor/descendant bookkeeping for every node, materialized.
struct NodeRelations {
  std::map<NodeId, std::vector<NodeId>> ancestors;    // root .. m
  std::map<NodeId, std::vector<NodeId>> descendants;  // ascending, m included
  std::map<NodeId, int> depth;
  std::vector<NodeId> leaves;
  int tree_depth = 0;
};

NodeRelations relations(const FeederGraph& g);

// Feeder files: CSV with header `from,to,r_pu,x_pu`, one line per edge.
std::vector<Line> parse_feeder_csv(std::istream& in);
FeederGraph read_feeder_csv(const std::filesystem::path& path);
void write_feeder_csv(std::ostream& out, std::span<const Line> lines);

/// Rated load per bus; CSV header `bus,p_pu,q_pu`.
struct BusLoad {
  double p = 0.0;
  double q = 0.0;
};
std::map<NodeId, BusLoad> parse_loads_csv(std::istream& in);
std::map<NodeId, BusLoad> read_loads_csv(const std::filesystem::path& path);

}  // namespace probetopo
