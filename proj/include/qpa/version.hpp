#pragma once

#include <string_view>

namespace qpa {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

}  // namespace qpa
