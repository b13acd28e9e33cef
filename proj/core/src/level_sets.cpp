#include "probetopo/level_sets.hpp"

#include <algorithm>

#include "probetopo/errors.hpp"

namespace probetopo {

const std::vector<NodeId>& LevelSetFamily::at_depth(int k) const {
  if (!has_depth(k)) {
    throw Error(ErrorCode::InconsistentLevelSets,
                "node " + std::to_string(owner) + " has no level set at depth " +
                    std::to_string(k));
  }
  return sets[static_cast<std::size_t>(k - first_depth)];
}

double LevelSetFamily::value_at_depth(int k) const {
  if (!has_depth(k) || values.size() != sets.size()) {
    throw Error(ErrorCode::InconsistentLevelSets,
                "node " + std::to_string(owner) + " has no value at depth " + std::to_string(k));
  }
  return values[static_cast<std::size_t>(k - first_depth)];
}

bool LevelSetFamily::same_sets(const LevelSetFamily& other) const {
  return owner == other.owner && first_depth == other.first_depth && sets == other.sets;
}

LevelSetFamily level_sets(const FeederGraph& g, NodeId m) {
  LevelSetFamily family;
  family.owner = m;
  const int dm = g.depth(m);
  for (int k = 0; k <= dm; ++k) {
    const NodeId anchor = g.ancestor_at(m, k);
    auto members = g.descendants(anchor);
    if (k < dm) {
      const NodeId next = g.ancestor_at(m, k + 1);
      std::erase_if(members, [&](NodeId v) { return g.is_ancestor(next, v); });
    }
    std::sort(members.begin(), members.end());
    family.sets.push_back(std::move(members));
    family.values.push_back(g.resistance_to_root(anchor));
  }
  return family;
}

LevelSetFamily metered_level_sets(const FeederGraph& g, NodeId m,
                                  std::span<const NodeId> probing) {
  std::vector<NodeId> p(probing.begin(), probing.end());
  std::sort(p.begin(), p.end());
  LevelSetFamily family = level_sets(g, m);
  for (auto& set : family.sets) {
    std::erase_if(set, [&](NodeId v) { return !std::binary_search(p.begin(), p.end(), v); });
  }
  family.metered = true;
  family.probing = std::move(p);
  return family;
}

LevelSetFamily observed_metered_view(const LevelSetFamily& metered) {
  LevelSetFamily view;
  view.owner = metered.owner;
  view.first_depth = 1;
  view.metered = true;
  view.probing = metered.probing;
  for (std::size_t i = 0; i < metered.sets.size(); ++i) {
    if (metered.sets[i].empty()) continue;
    view.sets.push_back(metered.sets[i]);
    if (i < metered.values.size()) view.values.push_back(metered.values[i]);
  }
  return view;
}

}  // namespace probetopo
