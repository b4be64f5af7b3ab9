#pragma once

namespace xpi {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xpi
