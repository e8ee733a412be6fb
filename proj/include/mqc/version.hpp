#pragma once

namespace mqc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mqc
