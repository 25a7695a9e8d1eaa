#pragma once

namespace fpm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fpm
