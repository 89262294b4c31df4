#pragma once

namespace snp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace snp
