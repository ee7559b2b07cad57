#pragma once

namespace csr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace csr
