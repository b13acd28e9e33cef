#include "probetopo/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "probetopo/errors.hpp"

namespace probetopo {
namespace {

struct Entry {
  NodeId id;
  double value;
};

std::vector<Entry> sorted_entries(std::span<const NodeId> rows, std::span<const double> column,
                                  Mode mode) {
  if (rows.size() != column.size()) {
    throw Error(ErrorCode::InvalidPlan, "column and row labels differ in length");
  }
  std::vector<Entry> entries;
  entries.reserve(rows.size() + 1);
  if (mode == Mode::Complete) entries.push_back({kSubstation, 0.0});
  for (std::size_t i = 0; i < rows.size(); ++i) entries.push_back({rows[i], column[i]});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.value != b.value ? a.value < b.value : a.id < b.id;
  });
  return entries;
}

// Splits sorted entries wherever the successive difference exceeds `threshold`.
ColumnGrouping split(const std::vector<Entry>& entries, double threshold, NodeId owner,
                     Mode mode) {
  ColumnGrouping out;
  out.owner = owner;
  out.mode = mode;
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].value - entries[i - 1].value > threshold) {
      if (i > 0) out.values.push_back(sum / static_cast<double>(out.groups.back().size()));
      out.groups.emplace_back();
      sum = 0.0;
    }
    out.groups.back().push_back(entries[i].id);
    sum += entries[i].value;
  }
  if (!out.groups.empty()) {
    out.values.push_back(sum / static_cast<double>(out.groups.back().size()));
  }
  for (auto& g : out.groups) std::sort(g.begin(), g.end());
  return out;
}

std::string ids(std::span<const NodeId> v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

}  // namespace

ColumnGrouping recover_level_sets_exact(std::span<const NodeId> rows,
                                        std::span<const double> column, NodeId owner,
                                        Mode mode) {
  const auto entries = sorted_entries(rows, column, mode);
  double scale = 0.0;
  for (const Entry& e : entries) scale = std::max(scale, std::abs(e.value));
  return split(entries, 1e-9 * scale, owner, mode);
}

ColumnGrouping recover_level_sets_noisy(std::span<const NodeId> rows,
                                        std::span<const double> column, NodeId owner,
                                        double r_min, Mode mode) {
  if (!(r_min > 0.0)) throw Error(ErrorCode::NonpositiveRmin, "r_min must be positive");
  return split(sorted_entries(rows, column, mode), r_min / 2.0, owner, mode);
}

std::vector<ColumnGrouping> group_columns(const EstimatedMatrix& estimate, double r_min,
                                          Mode mode) {
  std::vector<ColumnGrouping> out;
  out.reserve(estimate.cols.size());
  for (std::size_t j = 0; j < estimate.cols.size(); ++j) {
    const Eigen::VectorXd col = estimate.values.col(static_cast<Eigen::Index>(j));
    const std::span<const double> values(col.data(), static_cast<std::size_t>(col.size()));
    out.push_back(r_min > 0.0
                      ? recover_level_sets_noisy(estimate.rows, values, estimate.cols[j], r_min, mode)
                      : recover_level_sets_exact(estimate.rows, values, estimate.cols[j], mode));
  }
  return out;
}

std::vector<LevelSetFamily> assemble_family(std::span<const ColumnGrouping> groupings,
                                            Mode mode) {
  if (groupings.empty()) throw Error(ErrorCode::EmptyPartition, "no groupings to assemble");
  const ErrorCode fail = mode == Mode::Complete ? ErrorCode::InconsistentLevelSets
                                                : ErrorCode::InconsistentMeteredSets;

  std::vector<NodeId> owners;
  for (const auto& g : groupings) owners.push_back(g.owner);
  std::sort(owners.begin(), owners.end());
  if (std::adjacent_find(owners.begin(), owners.end()) != owners.end()) {
    throw Error(fail, "two groupings share an owner");
  }

  std::map<NodeId, int> depth_of;
  std::vector<NodeId> observed;
  for (std::size_t i = 0; i < groupings.size(); ++i) {
    const ColumnGrouping& g = groupings[i];
    if (g.mode != mode) throw Error(fail, "grouping mode does not match");
    if (g.groups.empty() || g.values.size() != g.groups.size()) {
      throw Error(fail, "grouping of node " + std::to_string(g.owner) + " is empty");
    }
    std::vector<NodeId> all;
    for (const auto& grp : g.groups) all.insert(all.end(), grp.begin(), grp.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw Error(fail, "groups of node " + std::to_string(g.owner) + " overlap");
    }
    if (i == 0) {
      observed = all;
    } else if (all != observed) {
      throw Error(fail, "groupings cover different node sets");
    }
    const auto& last = g.groups.back();
    if (!std::binary_search(last.begin(), last.end(), g.owner)) {
      throw Error(fail, "node " + std::to_string(g.owner) + " is not in its deepest level set");
    }
    if (mode == Mode::Complete) {
      const auto& first = g.groups.front();
      if (!std::binary_search(first.begin(), first.end(), kSubstation)) {
        throw Error(fail, "substation is not in level set 0 of node " + std::to_string(g.owner));
      }
    }
    depth_of[g.owner] = g.depth();
  }
  for (NodeId p : owners) {
    if (!std::binary_search(observed.begin(), observed.end(), p)) {
      throw Error(fail, "probing node " + std::to_string(p) + " is not metered");
    }
  }

  // R is symmetric: s sits at the same level of m's column as m of s's.
  std::map<NodeId, std::map<NodeId, std::size_t>> level;
  for (const auto& g : groupings) {
    for (std::size_t k = 0; k < g.groups.size(); ++k) {
      for (NodeId v : g.groups[k]) {
        if (depth_of.contains(v)) level[g.owner][v] = k;
      }
    }
  }
  for (const auto& [m, row] : level) {
    for (const auto& [s, k] : row) {
      if (level.at(s).at(m) != k) {
        throw Error(fail, "nodes " + std::to_string(m) + " and " + std::to_string(s) +
                              " disagree on the depth of their common ancestor");
      }
    }
  }

  if (mode == Mode::Complete) {
    // Each level set holds exactly one node at its own depth; all other
    // members are deeper. Probing nodes have known depths, so check them.
    for (const auto& g : groupings) {
      for (std::size_t k = 0; k < g.groups.size(); ++k) {
        int at_depth = 0;
        for (NodeId v : g.groups[k]) {
          const auto it = depth_of.find(v);
          if (it == depth_of.end()) continue;
          if (it->second < static_cast<int>(k)) {
            throw Error(fail, "node " + std::to_string(v) + " at depth " +
                                  std::to_string(it->second) + " sits in level set " +
                                  std::to_string(k) + " of node " + std::to_string(g.owner));
          }
          at_depth += it->second == static_cast<int>(k);
        }
        if (at_depth > 1) {
          throw Error(fail, "level set " + std::to_string(k) + " of node " +
                                std::to_string(g.owner) + " " + ids(g.groups[k]) +
                                " holds two nodes of depth " + std::to_string(k));
        }
      }
    }
  }

  std::vector<LevelSetFamily> families;
  families.reserve(groupings.size());
  for (const auto& g : groupings) {
    LevelSetFamily f;
    f.owner = g.owner;
    f.first_depth = mode == Mode::Complete ? 0 : 1;
    f.sets = g.groups;
    f.values = g.values;
    f.metered = mode == Mode::Partial;
    if (f.metered) f.probing = owners;
    families.push_back(std::move(f));
  }
  return families;
}

GroupingDiagnostics diagnose_column(std::span<const NodeId> rows,
                                    std::span<const double> column, NodeId owner,
                                    double r_min, Mode mode) {
  if (std::isnan(r_min)) throw Error(ErrorCode::NonpositiveRmin, "r_min must be a number");
  const auto entries = sorted_entries(rows, column, mode);
  GroupingDiagnostics d;
  d.owner = owner;
  if (r_min > 0.0) {
    d.threshold = r_min / 2.0;
  } else {
    double scale = 0.0;
    for (const Entry& e : entries) scale = std::max(scale, std::abs(e.value));
    d.threshold = 1e-9 * scale;
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    d.sorted_rows.push_back(entries[i].id);
    d.sorted_values.push_back(entries[i].value);
    if (i == 0) continue;
    const double gap = entries[i].value - entries[i - 1].value;
    d.gaps.push_back(gap);
    if (gap > d.threshold) d.boundaries.push_back(i);
  }
  return d;
}

void write_diagnostics_json(std::ostream& out, std::span<const GroupingDiagnostics> diagnostics) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& d : diagnostics) {
    doc.push_back({{"owner", d.owner},
                   {"threshold", d.threshold},
                   {"sorted_rows", d.sorted_rows},
                   {"sorted_values", d.sorted_values},
                   {"gaps", d.gaps},
                   {"boundaries", d.boundaries}});
  }
  out << doc.dump(2) << '\n';
}

}  // namespace probetopo
