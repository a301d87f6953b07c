#pragma once

namespace amp_sheet {
inline constexpr const char* version = "0.1.0";
}
