#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "probetopo/errors.hpp"
#include "probetopo/io.hpp"

namespace probetopo {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string report_metadata_json(const RecoveryReport& report, const Comparison* comparison) {
  json doc;
  doc["mode"] = to_string(report.mode);
  doc["probing"] = report.probing;
  doc["top"] = report.top;
  doc["top_resistance_pu"] = number_or_null(report.top_resistance);
  doc["internal"] = report.internal;

  json lines = json::array();
  for (const auto& line : report.lines) {
    lines.push_back({{"from", line.parent},
                     {"to", line.child},
                     {"r_pu", number_or_null(line.r)},
                     {"depth", line.depth},
                     {"witnesses", line.witnesses}});
  }
  doc["lines"] = std::move(lines);

  json trace = json::array();
  for (const auto& step : report.trace) {
    json s{{"depth", step.depth},
           {"members", step.members},
           {"node", step.node},
           {"synthetic", step.synthetic}};
    s["parent"] = step.has_parent ? json(step.parent) : json(nullptr);
    trace.push_back(std::move(s));
  }
  doc["trace"] = std::move(trace);

  if (comparison != nullptr) {
    json c{{"topology_correct", comparison->topology_correct},
           {"matched_lines", comparison->matched_lines}};
    c["resistance_mpe"] =
        comparison->resistance_mpe ? json(*comparison->resistance_mpe) : json(nullptr);
    doc["comparison"] = std::move(c);
  }
  return doc.dump(2) + "\n";
}

void write_report(const std::filesystem::path& directory, const RecoveryReport& report,
                  const Comparison* comparison) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + directory.string());

  const auto edges_path = directory / "edges.csv";
  std::ofstream edges(edges_path);
  if (!edges) throw Error(ErrorCode::IoError, "cannot write " + edges_path.string());
  write_feeder_csv(edges, report.edge_list());

  const auto meta_path = directory / "report.json";
  std::ofstream meta(meta_path);
  if (!meta) throw Error(ErrorCode::IoError, "cannot write " + meta_path.string());
  meta << report_metadata_json(report, comparison);
  if (!edges || !meta) throw Error(ErrorCode::IoError, "failed writing " + directory.string());
}

std::string reduced_grid_json(const ReducedGrid& grid) {
  json lines = json::array();
  for (const auto& line : grid.lines) {
    lines.push_back({{"from", line.from}, {"to", line.to}, {"r_pu", line.r}, {"x_pu", line.x}});
  }
  json doc{{"top", grid.top},
           {"top_resistance_pu", grid.top_resistance},
           {"top_reactance_pu", grid.top_reactance},
           {"nodes", grid.nodes},
           {"probing", grid.probing},
           {"internal", grid.internal},
           {"lines", std::move(lines)}};
  return doc.dump(2) + "\n";
}

}  // namespace probetopo
