#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "probetopo/errors.hpp"
#include "probetopo/io.hpp"
#include "text.hpp"

namespace probetopo {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "probetopo-record";
constexpr int kVersion = 1;

void write_rows(std::ostream& out, char tag, std::span<const NodeId> ids,
                const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << tag << ',' << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
      out << ',' << detail::format_number(m(i, t));
    }
    out << '\n';
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("record header lacks '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("record header field '") + key + "': " + e.what());
  }
}

}  // namespace

void write_record(std::ostream& out, const ProbingRecord& record) {
  json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["mode"] = to_string(record.mode);
  header["probing"] = record.probing;
  header["rows"] = record.rows;
  header["seed"] = record.seed;
  header["protocol"] = record.plan.protocol == Protocol::Sequential ? "sequential" : "general";
  header["periods"] = record.plan.periods;
  header["delta_pu"] = record.plan.delta;
  out << header.dump() << '\n';
  write_rows(out, 'D', record.probing, record.delta);
  write_rows(out, 'V', record.rows, record.voltages);
}

ProbingRecord read_record(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    try {
      header = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, detail::where(line_no) + "bad record header: " + e.what());
    }
    break;
  }
  if (!header.is_object()) throw Error(ErrorCode::ParseError, "missing record header");
  if (field<std::string>(header, "format") != kFormat ||
      field<int>(header, "version") != kVersion) {
    throw Error(ErrorCode::ParseError, "unsupported record format");
  }

  ProbingRecord record;
  try {
    record.mode = parse_mode(field<std::string>(header, "mode"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  record.probing = field<std::vector<NodeId>>(header, "probing");
  record.rows = field<std::vector<NodeId>>(header, "rows");
  record.seed = field<std::uint64_t>(header, "seed");
  const auto protocol = field<std::string>(header, "protocol");
  const auto periods = field<std::vector<int>>(header, "periods");
  const auto delta = field<std::vector<double>>(header, "delta_pu");
  if (protocol != "sequential" && protocol != "general") {
    throw Error(ErrorCode::ParseError, "unknown protocol '" + protocol + "'");
  }

  std::vector<std::vector<double>> d_rows;
  std::vector<std::vector<double>> v_rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skippable(line)) continue;
    const auto fields = detail::split(line);
    if (fields.size() < 3 || (fields[0] != "D" && fields[0] != "V")) {
      throw Error(ErrorCode::ParseError, detail::where(line_no) + "expected a D or V row");
    }
    const bool is_d = fields[0] == "D";
    auto& target = is_d ? d_rows : v_rows;
    const auto& ids = is_d ? record.probing : record.rows;
    const auto bus = detail::parse_number<NodeId>(fields[1], line_no, "bus");
    if (target.size() >= ids.size() || ids[target.size()] != bus) {
      throw Error(ErrorCode::ParseError,
                  detail::where(line_no) + "unexpected row for bus " + std::to_string(bus));
    }
    std::vector<double> values;
    for (std::size_t i = 2; i < fields.size(); ++i) {
      values.push_back(detail::parse_number<double>(fields[i], line_no, "value"));
    }
    if (!d_rows.empty() && values.size() != d_rows.front().size()) {
      throw Error(ErrorCode::ParseError, detail::where(line_no) + "row length differs");
    }
    if (!v_rows.empty() && values.size() != v_rows.front().size()) {
      throw Error(ErrorCode::ParseError, detail::where(line_no) + "row length differs");
    }
    target.push_back(std::move(values));
  }
  if (d_rows.size() != record.probing.size() || v_rows.size() != record.rows.size()) {
    throw Error(ErrorCode::ParseError, "record is missing D or V rows");
  }

  const auto cols = static_cast<Eigen::Index>(d_rows.empty() ? 0 : d_rows.front().size());
  auto to_matrix = [cols](const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (Eigen::Index t = 0; t < cols; ++t) m(static_cast<Eigen::Index>(i), t) = rows[i][t];
    }
    return m;
  };
  record.delta = to_matrix(d_rows);
  record.voltages = to_matrix(v_rows);

  try {
    if (protocol == "sequential") {
      record.plan = ProbingPlan::sequential(record.probing, delta, periods);
      if (record.plan.matrix() != record.delta) {
        throw Error(ErrorCode::ParseError, "D rows do not match the sequential plan");
      }
    } else {
      record.plan = ProbingPlan::general_matrix(record.probing, record.delta);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, std::string("invalid probing plan: ") + e.what());
  }
  return record;
}

void save_record(const std::filesystem::path& path, const ProbingRecord& record) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_record(out, record);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

ProbingRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_record(in);
}

}  // namespace probetopo
