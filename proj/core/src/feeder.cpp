#include "probetopo/feeder.hpp"

#include <algorithm>
#include <string>

#include "probetopo/errors.hpp"

namespace probetopo {
namespace {

std::string node_str(NodeId id) { return std::to_string(id); }

}  // namespace

FeederGraph FeederGraph::build(std::vector<Line> lines) {
  if (lines.empty()) {
    throw Error(ErrorCode::MissingRoot, "feeder has no lines");
  }

  std::unordered_map<NodeId, NodeId> parent_of;
  std::vector<NodeId> ids{kSubstation};
  bool root_seen = false;
  for (const Line& line : lines) {
    if (!(line.r > 0.0) || !(line.x > 0.0)) {
      throw Error(ErrorCode::NonpositiveImpedance,
                  "line " + node_str(line.from) + "-" + node_str(line.to) +
                      " must have positive r and x");
    }
    if (line.from < 0 || line.to < 0) {
      throw Error(ErrorCode::UnknownNode, "node IDs must be nonnegative");
    }
    if (line.from == line.to) {
      throw Error(ErrorCode::CycleDetected, "self-loop at node " + node_str(line.from));
    }
    if (line.to == kSubstation) {
      throw Error(ErrorCode::MissingRoot, "the substation (node 0) cannot have a parent");
    }
    if (!parent_of.emplace(line.to, line.from).second) {
      throw Error(ErrorCode::DuplicateNode,
                  "node " + node_str(line.to) + " has more than one parent");
    }
    root_seen = root_seen || line.from == kSubstation;
    ids.push_back(line.from);
    ids.push_back(line.to);
  }
  if (!root_seen) {
    throw Error(ErrorCode::MissingRoot, "no line leaves the substation (node 0)");
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  FeederGraph g;
  g.ids_ = std::move(ids);
  const std::size_t n = g.ids_.size();
  for (std::size_t i = 0; i < n; ++i) g.index_.emplace(g.ids_[i], i);

  g.parent_.assign(n, kNone);
  g.children_.assign(n, {});
  g.r_.assign(n, 0.0);
  g.x_.assign(n, 0.0);
  for (const Line& line : lines) {
    const std::size_t c = g.index_.at(line.to);
    g.parent_[c] = g.index_.at(line.from);
    g.children_[g.parent_[c]].push_back(line.to);
    g.r_[c] = line.r;
    g.x_[c] = line.x;
  }
  for (auto& kids : g.children_) std::sort(kids.begin(), kids.end());

  // Preorder walk from the root; anything unreached is on a cycle or in
  // another component.
  g.depth_.assign(n, -1);
  g.root_r_.assign(n, 0.0);
  g.root_x_.assign(n, 0.0);
  g.enter_.assign(n, 0);
  g.exit_.assign(n, 0);
  std::size_t clock = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  g.depth_[0] = 0;
  g.enter_[0] = clock++;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next < g.children_[v].size()) {
      const std::size_t c = g.index_.at(g.children_[v][next++]);
      g.depth_[c] = g.depth_[v] + 1;
      g.root_r_[c] = g.root_r_[v] + g.r_[c];
      g.root_x_[c] = g.root_x_[v] + g.x_[c];
      g.enter_[c] = clock++;
      g.tree_depth_ = std::max(g.tree_depth_, g.depth_[c]);
      stack.emplace_back(c, 0);
    } else {
      g.exit_[v] = clock++;
      stack.pop_back();
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (g.depth_[i] >= 0) continue;
    // Follow parents: reaching a parentless node means a separate
    // component, revisiting a node means a cycle.
    std::vector<bool> seen(n, false);
    std::size_t v = i;
    while (v != kNone && !seen[v] && g.depth_[v] < 0) {
      seen[v] = true;
      v = g.parent_[v];
    }
    if (v != kNone && seen[v]) {
      throw Error(ErrorCode::CycleDetected, "cycle through node " + node_str(g.ids_[v]));
    }
    throw Error(ErrorCode::Disconnected,
                "node " + node_str(g.ids_[i]) + " is not connected to the substation");
  }

  g.lines_ = std::move(lines);
  return g;
}

std::size_t FeederGraph::checked(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownNode, "unknown node " + node_str(id));
  }
  return it->second;
}

std::size_t FeederGraph::index_of(NodeId id) const { return checked(id); }

NodeId FeederGraph::parent(NodeId id) const {
  const std::size_t i = checked(id);
  if (parent_[i] == kNone) {
    throw Error(ErrorCode::UnknownNode, "the substation has no parent");
  }
  return ids_[parent_[i]];
}

std::span<const NodeId> FeederGraph::children(NodeId id) const {
  return children_[checked(id)];
}

std::vector<NodeId> FeederGraph::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 1; i < ids_.size(); ++i) {
    if (children_[i].empty()) out.push_back(ids_[i]);
  }
  return out;
}

int FeederGraph::depth(NodeId id) const { return depth_[checked(id)]; }

NodeId FeederGraph::ancestor_at(NodeId m, int k) const {
  std::size_t v = checked(m);
  if (k < 0 || k > depth_[v]) {
    throw Error(ErrorCode::UnknownNode, "node " + node_str(m) + " has no ancestor at depth " +
                                            std::to_string(k));
  }
  while (depth_[v] > k) v = parent_[v];
  return ids_[v];
}

std::vector<NodeId> FeederGraph::ancestors(NodeId m) const {
  std::vector<NodeId> out;
  for (std::size_t v = checked(m); v != kNone; v = parent_[v]) out.push_back(ids_[v]);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<NodeId> FeederGraph::descendants(NodeId m) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{ids_[checked(m)]};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    out.push_back(v);
    const auto& kids = children_[index_.at(v)];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool FeederGraph::is_ancestor(NodeId a, NodeId m) const {
  const std::size_t ia = checked(a);
  const std::size_t im = checked(m);
  return enter_[ia] <= enter_[im] && exit_[im] <= exit_[ia];
}

NodeId FeederGraph::common_ancestor(NodeId m, NodeId n) const {
  std::size_t a = checked(m);
  std::size_t b = checked(n);
  while (depth_[a] > depth_[b]) a = parent_[a];
  while (depth_[b] > depth_[a]) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return ids_[a];
}

double FeederGraph::line_resistance(NodeId child) const {
  const std::size_t i = checked(child);
  if (parent_[i] == kNone) throw Error(ErrorCode::UnknownNode, "the substation has no line");
  return r_[i];
}

double FeederGraph::line_reactance(NodeId child) const {
  const std::size_t i = checked(child);
  if (parent_[i] == kNone) throw Error(ErrorCode::UnknownNode, "the substation has no line");
  return x_[i];
}

double FeederGraph::resistance_to_root(NodeId m) const { return root_r_[checked(m)]; }
double FeederGraph::reactance_to_root(NodeId m) const { return root_x_[checked(m)]; }

NodeRelations relations(const FeederGraph& g) {
  NodeRelations rel;
  for (NodeId v : g.nodes()) {
    rel.ancestors.emplace(v, g.ancestors(v));
    auto desc = g.descendants(v);
    std::sort(desc.begin(), desc.end());
    rel.descendants.emplace(v, std::move(desc));
    rel.depth.emplace(v, g.depth(v));
  }
  rel.leaves = g.leaves();
  rel.tree_depth = g.tree_depth();
  return rel;
}

}  // namespace probetopo
