#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "probetopo/probing.hpp"
#include "probetopo/recovery.hpp"
#include "probetopo/reduced_grid.hpp"

namespace probetopo {

// Probing records: first line is a JSON object (mode, probing order, rows,
// delta, periods, protocol, seed). Then one CSV line per matrix row:
//   D,<bus>,v_1,...,v_T   probing matrix row
//   V,<bus>,v_1,...,v_T   voltage difference row
void write_record(std::ostream& out, const ProbingRecord& record);
ProbingRecord read_record(std::istream& in);
void save_record(const std::filesystem::path& path, const ProbingRecord& record);
ProbingRecord load_record(const std::filesystem::path& path);

/// Report metadata (mode, top, internal nodes, provenance, trace and an
/// optional comparison) as a JSON document.
std::string report_metadata_json(const RecoveryReport& report,
                                 const Comparison* comparison = nullptr);
void write_report(const std::filesystem::path& directory, const RecoveryReport& report,
                  const Comparison* comparison = nullptr);

std::string reduced_grid_json(const ReducedGrid& grid);

}  // namespace probetopo
