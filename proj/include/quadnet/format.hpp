#pragma once

#include <string>

#include <fmt/format.h>

namespace quadnet {

/// Round-trippable float text used by every CSV and JSON writer.
inline std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace quadnet
