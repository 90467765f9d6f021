#pragma once

namespace qhl {

inline constexpr const char* version = "0.1.0";

}  // namespace qhl
