#pragma once

namespace gdf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gdf
