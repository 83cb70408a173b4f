#pragma once

namespace semtree {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace semtree
