#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "probetopo/level_sets.hpp"
#include "probetopo/probing.hpp"

namespace probetopo {

/// Entries of one column of R_P (or R_PP) grouped by value.
///
/// Groups are ordered by increasing representative value. In complete mode
/// the substation is prepended with value 0 and group i holds depth i; in
/// partial mode group i holds reduced-grid depth i + 1.
struct ColumnGrouping {
  NodeId owner = kSubstation;
  Mode mode = Mode::Complete;
  std::vector<std::vector<NodeId>> groups;
  std::vector<double> values;  // group means

  int depth() const noexcept {
    const int n = static_cast<int>(groups.size());
    return mode == Mode::Complete ? n - 1 : n;
  }
};

/// Groups entries that are equal up to rounding (relative 1e-9 of the
/// largest entry).
ColumnGrouping recover_level_sets_exact(std::span<const NodeId> rows,
                                        std::span<const double> column, NodeId owner,
                                        Mode mode);

/// Sorts the entries and starts a new group wherever two successive values
/// differ by more than r_min / 2. Throws NonpositiveRmin.
ColumnGrouping recover_level_sets_noisy(std::span<const NodeId> rows,
                                        std::span<const double> column, NodeId owner,
                                        double r_min, Mode mode);

/// Groups every column of an estimate; exact rule when r_min <= 0.
std::vector<ColumnGrouping> group_columns(const EstimatedMatrix& estimate, double r_min,
                                          Mode mode);

/// Packages groupings as level-set families. Complete mode checks the
/// level-set structure across owners and throws InconsistentLevelSets when it
/// cannot hold for any tree. Partial mode throws InconsistentMeteredSets.
/// An empty input throws EmptyPartition.
std::vector<LevelSetFamily> assemble_family(std::span<const ColumnGrouping> groupings,
                                            Mode mode);

/// What the gap rule saw for one column.
struct GroupingDiagnostics {
  NodeId owner = kSubstation;
  std::vector<NodeId> sorted_rows;
  std::vector<double> sorted_values;
  std::vector<double> gaps;
  double threshold = 0.0;
  std::vector<std::size_t> boundaries;  // index of the first entry of each new group
};

// A nonpositive r_min selects the exact-grouping threshold.
GroupingDiagnostics diagnose_column(std::span<const NodeId> rows,
                                    std::span<const double> column, NodeId owner,
                                    double r_min, Mode mode);
void write_diagnostics_json(std::ostream& out, std::span<const GroupingDiagnostics> diagnostics);

}  // namespace probetopo
