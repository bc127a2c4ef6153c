#pragma once

namespace mecmfg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mecmfg
