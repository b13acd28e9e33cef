#pragma once

#include <string_view>

namespace probetopo {

/// Bus identifier. 0 is reserved for the substation.
using NodeId = int;

inline constexpr NodeId kSubstation = 0;

/// Complete: voltages metered at every bus. Partial: metered only at probing buses.
enum class Mode { Complete, Partial };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

}  // namespace probetopo
