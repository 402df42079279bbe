#pragma once

namespace pdmp_seasons {

inline constexpr const char* version = "1.0.0";

} // namespace pdmp_seasons
