#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "probetopo/errors.hpp"
#include "probetopo/feeder.hpp"
#include "text.hpp"

namespace probetopo {
namespace {

using detail::parse_number;
using detail::skippable;
using detail::split;
using detail::where;

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

// Reads the header line, skipping blank and '#' lines. Returns its number.
std::size_t expect_header(std::istream& in, std::string_view header) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    if (detail::trim(line) != header) {
      throw Error(ErrorCode::ParseError,
                  where(line_no) + "expected header '" + std::string(header) + "'");
    }
    return line_no;
  }
  throw Error(ErrorCode::ParseError, "missing header '" + std::string(header) + "'");
}

}  // namespace

std::vector<Line> parse_feeder_csv(std::istream& in) {
  std::size_t line_no = expect_header(in, "from,to,r_pu,x_pu");
  std::vector<Line> lines;
  std::string text;
  while (std::getline(in, text)) {
    ++line_no;
    if (skippable(text)) continue;
    const auto fields = split(text);
    if (fields.size() != 4) {
      throw Error(ErrorCode::ParseError,
                  where(line_no) + "expected 4 fields, got " + std::to_string(fields.size()));
    }
    lines.push_back(Line{parse_number<NodeId>(fields[0], line_no, "from"),
                         parse_number<NodeId>(fields[1], line_no, "to"),
                         parse_number<double>(fields[2], line_no, "r_pu"),
                         parse_number<double>(fields[3], line_no, "x_pu")});
  }
  return lines;
}

FeederGraph read_feeder_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return FeederGraph::build(parse_feeder_csv(in));
}

void write_feeder_csv(std::ostream& out, std::span<const Line> lines) {
  std::ostringstream buf;
  buf << "from,to,r_pu,x_pu\n";
  for (const Line& line : lines) {
    // A NaN reactance is left empty.
    buf << line.from << ',' << line.to << ',' << detail::format_number(line.r) << ','
        << detail::format_number(line.x) << '\n';
  }
  out << buf.str();
}

std::map<NodeId, BusLoad> parse_loads_csv(std::istream& in) {
  std::size_t line_no = expect_header(in, "bus,p_pu,q_pu");
  std::map<NodeId, BusLoad> loads;
  std::string text;
  while (std::getline(in, text)) {
    ++line_no;
    if (skippable(text)) continue;
    const auto fields = split(text);
    if (fields.size() != 3) {
      throw Error(ErrorCode::ParseError,
                  where(line_no) + "expected 3 fields, got " + std::to_string(fields.size()));
    }
    const auto bus = parse_number<NodeId>(fields[0], line_no, "bus");
    const BusLoad load{parse_number<double>(fields[1], line_no, "p_pu"),
                       parse_number<double>(fields[2], line_no, "q_pu")};
    if (!loads.emplace(bus, load).second) {
      throw Error(ErrorCode::ParseError, where(line_no) + "duplicate bus " + std::to_string(bus));
    }
  }
  return loads;
}

std::map<NodeId, BusLoad> read_loads_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_loads_csv(in);
}

}  // namespace probetopo
