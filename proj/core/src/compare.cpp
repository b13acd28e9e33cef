#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>

#include "probetopo/errors.hpp"
#include "probetopo/recovery.hpp"

namespace probetopo {
namespace {

// Rooted tree with line resistances keyed by child.
struct RootedView {
  NodeId root = kSubstation;
  std::unordered_map<NodeId, std::vector<NodeId>> children;
  std::unordered_map<NodeId, double> r;
  std::set<NodeId> nodes;

  void add(NodeId parent, NodeId child, double resistance) {
    children[parent].push_back(child);
    r[child] = resistance;
    nodes.insert(parent);
    nodes.insert(child);
  }
  const std::vector<NodeId>& kids(NodeId v) const {
    static const std::vector<NodeId> none;
    auto it = children.find(v);
    return it == children.end() ? none : it->second;
  }
};

RootedView view(const RecoveryReport& report) {
  RootedView t;
  t.root = report.top;
  t.nodes.insert(report.top);
  for (const auto& line : report.lines) t.add(line.parent, line.child, line.r);
  return t;
}

RootedView view(const FeederGraph& g) {
  RootedView t;
  t.root = kSubstation;
  t.nodes.insert(kSubstation);
  for (const auto& line : g.lines()) t.add(line.from, line.to, line.r);
  return t;
}

RootedView view(const ReducedGrid& grid) {
  RootedView t;
  t.root = grid.top;
  t.nodes.insert(grid.top);
  for (const auto& line : grid.lines) t.add(line.from, line.to, line.r);
  return t;
}

// Canonical strings of every subtree; labels in `fixed` take part in the
// string, other nodes are anonymous.
class Canon {
 public:
  Canon(const RootedView& t, std::function<bool(NodeId)> fixed) : t_(t), fixed_(std::move(fixed)) {
    compute(t.root);
  }
  const std::string& of(NodeId v) const { return canon_.at(v); }

 private:
  const std::string& compute(NodeId v) {
    std::vector<std::string> parts;
    for (NodeId c : t_.kids(v)) parts.push_back(compute(c));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    s += fixed_(v) ? std::to_string(v) : "*";
    for (const auto& p : parts) s += p;
    s += ")";
    return canon_[v] = std::move(s);
  }

  const RootedView& t_;
  std::function<bool(NodeId)> fixed_;
  std::unordered_map<NodeId, std::string> canon_;
};

Comparison compare_views(const RootedView& rec, const RootedView& truth,
                         const std::function<bool(NodeId)>& fixed) {
  Comparison out;
  const Canon a(rec, fixed);
  const Canon b(truth, fixed);
  if (a.of(rec.root) != b.of(truth.root)) return out;
  out.topology_correct = true;

  // Pair children with equal canonical strings, in order; then accumulate
  // the relative resistance errors of paired lines.
  double sum = 0.0;
  std::vector<std::pair<NodeId, NodeId>> stack{{rec.root, truth.root}};
  while (!stack.empty()) {
    auto [u, v] = stack.back();
    stack.pop_back();
    std::multimap<std::string, NodeId> pending;
    for (NodeId c : truth.kids(v)) pending.emplace(b.of(c), c);
    for (NodeId c : rec.kids(u)) {
      auto it = pending.find(a.of(c));
      const NodeId d = it->second;
      pending.erase(it);
      const double r_true = truth.r.at(d);
      sum += std::abs(rec.r.at(c) - r_true) / r_true;
      ++out.matched_lines;
      stack.emplace_back(c, d);
    }
  }
  if (out.matched_lines > 0) out.resistance_mpe = sum / static_cast<double>(out.matched_lines);
  return out;
}

}  // namespace

Comparison compare_graphs(const RecoveryReport& recovered, const FeederGraph& truth) {
  for (NodeId p : recovered.probing) {
    if (!truth.contains(p)) {
      throw Error(ErrorCode::LabelMismatch,
                  "probing bus " + std::to_string(p) + " is not in the feeder");
    }
  }
  return compare_views(view(recovered), view(truth), [](NodeId) { return true; });
}

Comparison compare_graphs(const RecoveryReport& recovered, const ReducedGrid& truth) {
  if (recovered.probing != truth.probing) {
    throw Error(ErrorCode::LabelMismatch, "recovered and true probing sets differ");
  }
  const auto& p = truth.probing;
  return compare_views(view(recovered), view(truth),
                       [&p](NodeId v) { return std::binary_search(p.begin(), p.end(), v); });
}

Eigen::MatrixXd probing_block(const RecoveryReport& report, std::span<const NodeId> order) {
  ReducedGrid grid;
  grid.top = report.top;
  grid.top_resistance = report.top_resistance;
  for (const auto& line : report.edge_list()) grid.lines.push_back(line);
  return grid.probing_block(order);
}

}  // namespace probetopo
