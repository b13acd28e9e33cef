#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "probetopo/errors.hpp"
#include "probetopo/feeder.hpp"

namespace fixtures {

using probetopo::Line;

/// 0 - 1 with children 2 and 3 below 1.
inline probetopo::FeederGraph y_tree() {
  return probetopo::build_feeder({{0, 1, 1.0, 1.0}, {1, 2, 2.0, 1.0}, {1, 3, 3.0, 1.0}});
}

/// 0 - 1 - 2.
inline probetopo::FeederGraph path_tree() {
  return probetopo::build_feeder({{0, 1, 1.0, 1.0}, {1, 2, 2.0, 1.0}});
}

inline std::filesystem::path data(const std::string& name) {
  return std::filesystem::path(PROBETOPO_DATA_DIR) / name;
}

inline probetopo::FeederGraph ieee37() { return probetopo::read_feeder_csv(data("ieee37.csv")); }

/// Code of the probetopo::Error thrown by f, or nullopt when none is thrown.
template <typename F>
std::optional<probetopo::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const probetopo::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace fixtures
