#include "probetopo/recovery.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "probetopo/errors.hpp"

namespace probetopo {
namespace {

struct State {
  int depth = 0;
  std::vector<NodeId> members;  // ascending
  NodeId parent = kSubstation;
  bool has_parent = false;
};

std::string ids(std::span<const NodeId> v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

std::string describe(const State& s) {
  std::string text = "depth " + std::to_string(s.depth) + ", buses " + ids(s.members);
  if (s.has_parent) text += ", parent " + std::to_string(s.parent);
  return text;
}

using FamilyIndex = std::unordered_map<NodeId, const LevelSetFamily*>;

FamilyIndex index_families(std::span<const LevelSetFamily> families,
                           std::span<const NodeId> probing, int first_depth, ErrorCode fail) {
  if (families.empty() || probing.empty()) {
    throw Error(ErrorCode::EmptyPartition, "no probing buses to recover from");
  }
  FamilyIndex index;
  for (const auto& f : families) {
    if (f.first_depth != first_depth) {
      throw Error(fail, "level sets of node " + std::to_string(f.owner) + " start at depth " +
                            std::to_string(f.first_depth) + ", expected " +
                            std::to_string(first_depth));
    }
    if (f.values.size() != f.sets.size()) {
      throw Error(fail, "level sets of node " + std::to_string(f.owner) + " carry no values");
    }
    if (!index.emplace(f.owner, &f).second) {
      throw Error(fail, "duplicate level sets for node " + std::to_string(f.owner));
    }
  }
  for (NodeId p : probing) {
    if (!index.contains(p)) {
      throw Error(fail, "no level sets for probing bus " + std::to_string(p));
    }
  }
  return index;
}

double mean_difference(const FamilyIndex& fam, std::span<const NodeId> members, int k) {
  double sum = 0.0;
  for (NodeId m : members) {
    const auto* f = fam.at(m);
    sum += f->value_at_depth(k) - f->value_at_depth(k - 1);
  }
  return sum / static_cast<double>(members.size());
}

// Splits `rest` by identical level sets at depth k. Groups are ordered by
// their smallest member.
std::vector<std::vector<NodeId>> partition(const FamilyIndex& fam,
                                           const std::vector<NodeId>& rest, int k) {
  std::map<std::vector<NodeId>, std::vector<NodeId>> by_set;
  for (NodeId m : rest) by_set[fam.at(m)->at_depth(k)].push_back(m);
  std::vector<std::vector<NodeId>> groups;
  for (auto& [set, group] : by_set) groups.push_back(std::move(group));
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return groups;
}

std::vector<NodeId> sorted_unique(std::span<const NodeId> v) {
  std::vector<NodeId> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<NodeId> RecoveryReport::nodes() const {
  std::vector<NodeId> out{top};
  for (const auto& line : lines) out.push_back(line.child);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Line> RecoveryReport::edge_list() const {
  std::vector<Line> out;
  for (const auto& line : lines) {
    out.push_back(Line{line.parent, line.child, line.r, std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

RecoveryReport recover_full(std::span<const LevelSetFamily> families,
                            std::span<const NodeId> probing) {
  const ErrorCode fail = ErrorCode::InconsistentLevelSets;
  const auto p = sorted_unique(probing);
  const FamilyIndex fam = index_families(families, p, 0, fail);

  // With every leaf probed, no two nodes share their level in every family
  // (rows of R_P are distinct). A repeated signature means an unprobed leaf.
  std::map<std::vector<int>, NodeId> signatures;
  const auto& reference = *fam.at(p.front());
  for (const auto& set : reference.sets) {
    for (NodeId v : set) {
      std::vector<int> sig;
      for (NodeId m : p) {
        const auto* f = fam.at(m);
        int level = -1;
        for (std::size_t k = 0; k < f->sets.size() && level < 0; ++k) {
          if (std::binary_search(f->sets[k].begin(), f->sets[k].end(), v)) {
            level = static_cast<int>(k);
          }
        }
        sig.push_back(level);
      }
      const auto [it, fresh] = signatures.emplace(std::move(sig), v);
      if (!fresh) {
        throw Error(ErrorCode::AssumptionViolated,
                    "nodes " + std::to_string(it->second) + " and " + std::to_string(v) +
                        " are indistinguishable; is every leaf probed?");
      }
    }
  }

  RecoveryReport report;
  report.mode = Mode::Complete;
  report.probing = p;
  report.top = kSubstation;

  std::set<NodeId> placed;
  std::deque<State> queue{State{0, p, kSubstation, false}};
  while (!queue.empty()) {
    State s = std::move(queue.front());
    queue.pop_front();
    const int k = s.depth;

    // The k-depth ancestor is the only node common to all k-th level sets.
    std::vector<NodeId> common;
    for (std::size_t i = 0; i < s.members.size(); ++i) {
      const auto* f = fam.at(s.members[i]);
      if (!f->has_depth(k)) {
        throw Error(fail, "node " + std::to_string(f->owner) + " has no level set at " +
                              describe(s));
      }
      const auto& set = f->at_depth(k);
      if (i == 0) {
        common = set;
        continue;
      }
      std::vector<NodeId> next;
      std::set_intersection(common.begin(), common.end(), set.begin(), set.end(),
                            std::back_inserter(next));
      common = std::move(next);
    }
    if (common.size() != 1) {
      throw Error(ErrorCode::AmbiguousIntersection,
                  "level sets intersect in " + ids(common) + " at " + describe(s));
    }
    const NodeId n = common.front();
    if ((k == 0) != (n == kSubstation) || !placed.insert(n).second) {
      throw Error(ErrorCode::AmbiguousIntersection,
                  "node " + std::to_string(n) + " cannot be placed at " + describe(s));
    }
    const bool n_probing = std::binary_search(p.begin(), p.end(), n);
    if (n_probing && !std::binary_search(s.members.begin(), s.members.end(), n)) {
      throw Error(fail, "probing bus " + std::to_string(n) + " found outside its subtree at " +
                            describe(s));
    }
    report.trace.push_back(RecursionStep{k, s.members, s.parent, s.has_parent, n, false});

    if (s.has_parent) {
      report.lines.push_back(
          RecoveredLine{s.parent, n, mean_difference(fam, s.members, k), k, s.members});
    }

    std::vector<NodeId> rest;
    for (NodeId m : s.members) {
      if (m == n) continue;
      if (fam.at(m)->depth() <= k) {
        throw Error(fail, "node " + std::to_string(m) + " is too shallow for " + describe(s));
      }
      rest.push_back(m);
    }
    for (auto& group : partition(fam, rest, k)) {
      queue.push_back(State{k + 1, std::move(group), n, true});
    }
  }

  // Every metered node must have been reached; a miss means an unprobed leaf.
  const auto& any = *fam.at(p.front());
  for (const auto& set : any.sets) {
    for (NodeId v : set) {
      if (!placed.contains(v)) {
        throw Error(ErrorCode::AssumptionViolated,
                    "node " + std::to_string(v) + " was never reached; is every leaf probed?");
      }
    }
  }
  std::set<NodeId> parents;
  for (const auto& line : report.lines) parents.insert(line.parent);
  for (NodeId v : placed) {
    if (v != kSubstation && !parents.contains(v) && !std::binary_search(p.begin(), p.end(), v)) {
      throw Error(ErrorCode::AssumptionViolated,
                  "recovered leaf " + std::to_string(v) + " is not a probing bus");
    }
  }
  return report;
}

RecoveryReport recover_partial(std::span<const LevelSetFamily> families,
                               std::span<const NodeId> probing) {
  const ErrorCode fail = ErrorCode::InconsistentMeteredSets;
  const auto p = sorted_unique(probing);
  const FamilyIndex fam = index_families(families, p, 1, fail);

  RecoveryReport report;
  report.mode = Mode::Partial;
  report.probing = p;
  NodeId next_id = p.back() + 1;

  std::set<NodeId> placed;
  std::deque<State> queue{State{1, p, kSubstation, false}};
  while (!queue.empty()) {
    State s = std::move(queue.front());
    queue.pop_front();
    const int k = s.depth;

    // The subtree root is probed iff some member meters exactly the subtree.
    std::vector<NodeId> roots;
    for (NodeId m : s.members) {
      const auto* f = fam.at(m);
      if (!f->has_depth(k)) {
        throw Error(fail, "node " + std::to_string(m) + " has no metered set at " + describe(s));
      }
      const auto& set = f->at_depth(k);
      if (!std::includes(s.members.begin(), s.members.end(), set.begin(), set.end())) {
        throw Error(fail, "metered set " + ids(set) + " of node " + std::to_string(m) +
                              " leaves the subtree at " + describe(s));
      }
      if (set == s.members) roots.push_back(m);
    }
    if (roots.size() > 1) {
      throw Error(fail, "several subtree roots " + ids(roots) + " at " + describe(s));
    }
    const bool synthetic = roots.empty();
    const NodeId n = synthetic ? next_id++ : roots.front();
    if (!synthetic && fam.at(n)->depth() != k) {
      throw Error(fail, "subtree root " + std::to_string(n) + " has deeper metered sets at " +
                            describe(s));
    }
    if (!placed.insert(n).second) {
      throw Error(fail, "node " + std::to_string(n) + " placed twice at " + describe(s));
    }
    if (synthetic) report.internal.push_back(n);
    report.trace.push_back(RecursionStep{k, s.members, s.parent, s.has_parent, n, synthetic});

    if (k == 1) {
      report.top = n;
      double sum = 0.0;
      for (NodeId m : s.members) sum += fam.at(m)->value_at_depth(1);
      report.top_resistance = sum / static_cast<double>(s.members.size());
    } else {
      report.lines.push_back(
          RecoveredLine{s.parent, n, mean_difference(fam, s.members, k), k, s.members});
    }

    std::vector<NodeId> rest;
    for (NodeId m : s.members) {
      if (m == n) continue;
      if (fam.at(m)->depth() <= k) {
        throw Error(fail, "node " + std::to_string(m) + " is too shallow for " + describe(s));
      }
      rest.push_back(m);
    }
    auto groups = partition(fam, rest, k);
    if (synthetic && groups.size() < 2) {
      throw Error(fail, "non-probing node would have a single branch at " + describe(s));
    }
    for (auto& group : groups) queue.push_back(State{k + 1, std::move(group), n, true});
  }
  std::sort(report.internal.begin(), report.internal.end());
  return report;
}

}  // namespace probetopo
