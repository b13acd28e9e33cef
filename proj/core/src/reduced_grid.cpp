#include "probetopo/reduced_grid.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "probetopo/errors.hpp"

namespace probetopo {

bool ReducedGrid::is_probing(NodeId id) const {
  return std::binary_search(probing.begin(), probing.end(), id);
}

Eigen::MatrixXd ReducedGrid::probing_block(std::span<const NodeId> order) const {
  // Root-to-node resistance inside the reduced grid, offset by the
  // substation-to-top resistance.
  std::unordered_map<NodeId, NodeId> parent;
  std::unordered_map<NodeId, double> up_r;
  for (const Line& line : lines) {
    parent[line.to] = line.from;
    up_r[line.to] = line.r;
  }
  auto path = [&](NodeId v) {
    std::vector<NodeId> chain{v};
    while (parent.contains(chain.back())) chain.push_back(parent.at(chain.back()));
    std::reverse(chain.begin(), chain.end());
    return chain;
  };
  const auto n = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd out(n, n);
  std::vector<std::vector<NodeId>> chains;
  for (NodeId v : order) chains.push_back(path(v));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto& a = chains[i];
      const auto& b = chains[j];
      double shared = top_resistance;
      for (std::size_t k = 1; k < std::min(a.size(), b.size()) && a[k] == b[k]; ++k) {
        shared += up_r.at(a[k]);
      }
      out(i, j) = out(j, i) = shared;
    }
  }
  return out;
}

FeederGraph ReducedGrid::as_feeder() const {
  std::vector<Line> all = lines;
  if (top != kSubstation) all.push_back(Line{kSubstation, top, top_resistance, top_reactance});
  return FeederGraph::build(std::move(all));
}

ReducedGrid reduce_grid(const FeederGraph& g, std::span<const NodeId> probing) {
  std::vector<NodeId> p(probing.begin(), probing.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.empty()) throw Error(ErrorCode::EmptyPartition, "probing set is empty");
  for (NodeId v : p) {
    if (!g.contains(v)) {
      throw Error(ErrorCode::UnknownNode, "probing bus " + std::to_string(v) + " not in feeder");
    }
    if (v == kSubstation) {
      throw Error(ErrorCode::AssumptionViolated, "the substation cannot be a probing bus");
    }
  }
  for (NodeId leaf : g.leaves()) {
    if (!std::binary_search(p.begin(), p.end(), leaf)) {
      throw Error(ErrorCode::LeafNotProbed, "leaf " + std::to_string(leaf) + " is not probed");
    }
  }

  // Count, per node, the children whose subtree holds a probing bus.
  std::unordered_map<NodeId, int> probed_below;
  std::unordered_set<NodeId> has_probe;
  const auto order = g.descendants(kSubstation);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    bool any = std::binary_search(p.begin(), p.end(), v);
    int branches = 0;
    for (NodeId c : g.children(v)) {
      if (has_probe.contains(c)) {
        ++branches;
        any = true;
      }
    }
    probed_below[v] = branches;
    if (any) has_probe.insert(v);
  }

  ReducedGrid grid;
  grid.probing = p;
  for (NodeId v : order) {
    if (!std::binary_search(p.begin(), p.end(), v) && probed_below[v] >= 2) {
      grid.internal.push_back(v);
    }
  }
  std::sort(grid.internal.begin(), grid.internal.end());
  std::set_union(p.begin(), p.end(), grid.internal.begin(), grid.internal.end(),
                 std::back_inserter(grid.nodes));

  auto kept = [&](NodeId v) { return std::binary_search(grid.nodes.begin(), grid.nodes.end(), v); };
  bool top_found = false;
  for (NodeId v : order) {  // preorder: the first kept node is the top
    if (!kept(v)) continue;
    NodeId up = v;
    bool linked = false;
    while (up != kSubstation) {
      up = g.parent(up);
      if (kept(up)) {
        grid.lines.push_back(Line{up, v, g.resistance_to_root(v) - g.resistance_to_root(up),
                                  g.reactance_to_root(v) - g.reactance_to_root(up)});
        linked = true;
        break;
      }
    }
    if (!linked) {
      if (top_found) {
        throw Error(ErrorCode::AssumptionViolated, "reduced grid has two roots");
      }
      top_found = true;
      grid.top = v;
      grid.top_resistance = g.resistance_to_root(v);
      grid.top_reactance = g.reactance_to_root(v);
    }
  }
  return grid;
}

}  // namespace probetopo
