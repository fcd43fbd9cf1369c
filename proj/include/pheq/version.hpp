#pragma once

namespace pheq {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchemaVersion = "1";

}  // namespace pheq
