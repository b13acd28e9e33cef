#pragma once

// Structural properties of level sets, metered level sets and the recursion,
// shared by the unit tests and the acceptance run. Each check returns an
// empty string on success and a description of the first violation
// otherwise.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "probetopo/level_sets.hpp"
#include "probetopo/recovery.hpp"
#include "probetopo/reduced_grid.hpp"
#include "probetopo/resistance.hpp"

namespace props {

using probetopo::FeederGraph;
using probetopo::LevelSetFamily;
using probetopo::NodeId;

inline std::string at(const char* what, NodeId m, int k) {
  return std::string(what) + " fails for node " + std::to_string(m) + " at depth " +
         std::to_string(k);
}

inline bool contains(const std::vector<NodeId>& v, NodeId x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

inline std::vector<NodeId> intersect(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// Level sets of every node: each holds its ancestor and deeper nodes below
/// it, leaves end with themselves, and descendants share the shallower sets.
inline std::string level_set_structure(const FeederGraph& g) {
  for (NodeId m : g.nodes()) {
    const auto fam = probetopo::level_sets(g, m);
    const int dm = g.depth(m);
    for (int k = 0; k <= dm; ++k) {
      const auto& set = fam.at_depth(k);
      const NodeId alpha = g.ancestor_at(m, k);
      // ancestor at depth k, other members deeper
      for (NodeId n : set) {
        if (n == alpha ? g.depth(n) != k : g.depth(n) <= k) return at("level set ancestor", m, k);
      }
      if (!contains(set, alpha)) return at("level set ancestor", m, k);
      // members hang below the same ancestor
      for (NodeId n : set) {
        if (g.ancestor_at(n, k) != alpha) return at("level set subtree", m, k);
      }
      // m is in its deepest set only
      if ((k == dm) != contains(set, m)) return at("level set owner", m, k);
    }
    // a leaf's deepest set is itself
    if (g.is_leaf(m) && fam.at_depth(dm) != std::vector<NodeId>{m}) {
      return at("leaf level set", m, dm);
    }
    // descendants share the shallower sets
    for (NodeId s : g.descendants(m)) {
      const auto sf = probetopo::level_sets(g, s);
      for (int k = 0; k < dm; ++k) {
        if (sf.at_depth(k) != fam.at_depth(k)) return at("shared shallow level sets", s, k);
      }
    }
  }
  return {};
}

/// Column structure of R for every non-root node: leaves dominate their
/// column, equal entries mark a shared level set, and consecutive levels
/// differ by one line resistance.
inline std::string resistance_structure(const FeederGraph& g) {
  const auto R = probetopo::resistance_matrix(g);
  auto r = [&](NodeId n, NodeId m) { return n == 0 ? 0.0 : R.at(n, m); };
  const double tol = 1e-12 * R.r().cwiseAbs().maxCoeff();
  for (NodeId m : R.buses()) {
    // a leaf dominates its column
    if (g.is_leaf(m)) {
      for (NodeId n : R.buses()) {
        if (n != m && !(R.at(m, m) > R.at(n, m))) return at("leaf column maximum", m, g.depth(m));
      }
    }
    const auto fam = probetopo::level_sets(g, m);
    // equal entries iff same level set
    std::map<NodeId, int> level;
    for (int k = 0; k <= fam.depth(); ++k) {
      for (NodeId n : fam.at_depth(k)) level[n] = k;
    }
    for (NodeId n : g.nodes()) {
      for (NodeId s : g.nodes()) {
        const bool same_value = std::abs(r(n, m) - r(s, m)) <= tol;
        if (same_value != (level.at(n) == level.at(s))) return at("equal entries and level sets", m, level.at(n));
      }
    }
    // consecutive levels differ by the line in between
    for (int k = 1; k <= fam.depth(); ++k) {
      const double line = g.line_resistance(g.ancestor_at(m, k));
      for (NodeId n : fam.at_depth(k - 1)) {
        for (NodeId s : fam.at_depth(k)) {
          if (std::abs(r(s, m) - r(n, m) - line) > tol) return at("level value steps", m, k);
        }
      }
    }
  }
  return {};
}

/// Reduced grid seen as a rooted tree with depth 1 at its top node.
struct ReducedTree {
  std::map<NodeId, NodeId> parent;
  std::map<NodeId, int> depth;
  std::map<NodeId, std::vector<NodeId>> probes_below;  // P_n, ascending

  ReducedTree(const probetopo::ReducedGrid& grid) {
    depth[grid.top] = 1;
    for (const auto& l : grid.lines) parent[l.to] = l.from;
    for (NodeId v : grid.nodes) {
      NodeId u = v;
      int d = 1;
      while (parent.contains(u)) {
        u = parent.at(u);
        ++d;
      }
      depth[v] = d;
    }
    for (NodeId p : grid.probing) {
      for (NodeId u = p;; u = parent.at(u)) {
        probes_below[u].push_back(p);
        if (!parent.contains(u)) break;
      }
    }
    for (auto& [n, v] : probes_below) std::sort(v.begin(), v.end());
  }

  NodeId ancestor_at(NodeId m, int k) const {
    NodeId u = m;
    while (depth.at(u) > k) u = parent.at(u);
    return u;
  }
};

/// On the reduced grid, every level set of every leaf meets P.
inline std::string metered_sets_meet_every_depth(const probetopo::ReducedGrid& grid) {
  const auto g = grid.as_feeder();
  for (NodeId m : g.leaves()) {
    const auto fam = probetopo::level_sets(g, m);
    for (int k = 1; k <= fam.depth(); ++k) {
      if (intersect(fam.at_depth(k), grid.probing).empty()) return at("metered set coverage", m, k);
    }
  }
  return {};
}

inline std::vector<LevelSetFamily> metered(const FeederGraph& g, const std::vector<NodeId>& p) {
  std::vector<LevelSetFamily> out;
  for (NodeId m : p) out.push_back(probetopo::observed_metered_view(probetopo::metered_level_sets(g, m, p)));
  return out;
}

/// The intersection of the k-th level sets over P_n^k is
/// {n}, and equals the intersection taken over the leaves in P_n^k only.
inline std::string intersections_identify_nodes(const FeederGraph& g, const std::vector<NodeId>& p) {
  std::vector<LevelSetFamily> fams;
  std::map<NodeId, std::size_t> idx;
  for (NodeId m : p) {
    idx[m] = fams.size();
    fams.push_back(probetopo::level_sets(g, m));
  }
  const auto report = probetopo::recover_full(fams, p);
  for (const auto& step : report.trace) {
    const int k = step.depth;
    std::vector<NodeId> all;
    std::vector<NodeId> leaves;
    bool first = true;
    bool first_leaf = true;
    for (NodeId m : step.members) {
      const auto& set = fams[idx.at(m)].at_depth(k);
      all = first ? set : intersect(all, set);
      first = false;
      if (g.is_leaf(m)) {
        leaves = first_leaf ? set : intersect(leaves, set);
        first_leaf = false;
      }
    }
    const NodeId n = g.ancestor_at(step.members.front(), k);
    if (all != std::vector<NodeId>{n} || step.node != n) return at("intersection identity", n, k);
    if (!first_leaf && leaves != all) return at("intersection identity (leaf identity)", n, k);
  }
  return {};
}

/// For m, m' with the same k-depth ancestor and depth > k,
/// N_m^k = N_m'^k iff their (k+1)-depth ancestors coincide.
inline std::string level_sets_split_by_child(const FeederGraph& g, const std::vector<NodeId>& p) {
  for (NodeId m : p) {
    const auto fm = probetopo::level_sets(g, m);
    for (NodeId s : p) {
      const auto fs = probetopo::level_sets(g, s);
      const int top = std::min(g.depth(m), g.depth(s)) - 1;
      for (int k = 0; k <= top; ++k) {
        if (g.ancestor_at(m, k) != g.ancestor_at(s, k)) break;
        const bool same_sets = fm.at_depth(k) == fs.at_depth(k);
        const bool same_child = g.ancestor_at(m, k + 1) == g.ancestor_at(s, k + 1);
        if (same_sets != same_child) return at("level set split", m, k);
      }
    }
  }
  return {};
}

/// A reduced-grid node n at depth k is probed iff some
/// m in P_n has M_m^k = P_n (and then m = n).
inline std::string probed_nodes_own_their_set(const FeederGraph& g, const std::vector<NodeId>& p) {
  const auto grid = probetopo::reduce_grid(g, p);
  const ReducedTree t(grid);
  std::map<NodeId, LevelSetFamily> fams;
  for (auto& f : metered(g, p)) fams[f.owner] = f;
  for (NodeId n : grid.nodes) {
    const int k = t.depth.at(n);
    const auto& below = t.probes_below.at(n);
    std::vector<NodeId> roots;
    for (NodeId m : below) {
      if (fams.at(m).has_depth(k) && fams.at(m).at_depth(k) == below) roots.push_back(m);
    }
    const bool probed = grid.is_probing(n);
    if (probed ? roots != std::vector<NodeId>{n} : !roots.empty()) {
      return at("probed node ownership", n, k);
    }
  }
  return {};
}

/// For m, m' strictly below a reduced-grid node n at depth k,
/// M_m^k = M_m'^k iff their (k+1)-depth reduced ancestors coincide.
inline std::string metered_sets_split_by_child(const FeederGraph& g, const std::vector<NodeId>& p) {
  const auto grid = probetopo::reduce_grid(g, p);
  const ReducedTree t(grid);
  std::map<NodeId, LevelSetFamily> fams;
  for (auto& f : metered(g, p)) fams[f.owner] = f;
  for (NodeId n : grid.nodes) {
    const int k = t.depth.at(n);
    for (NodeId m : t.probes_below.at(n)) {
      if (m == n) continue;
      for (NodeId s : t.probes_below.at(n)) {
        if (s == n) continue;
        const bool same_sets = fams.at(m).at_depth(k) == fams.at(s).at_depth(k);
        const bool same_child = t.ancestor_at(m, k + 1) == t.ancestor_at(s, k + 1);
        if (same_sets != same_child) return at("metered set split", m, k);
      }
    }
  }
  return {};
}

}  // namespace props
