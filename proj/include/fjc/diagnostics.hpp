#pragma once

#include <functional>
#include <string_view>

namespace fjc {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal conditions (degenerate gossip rows, power-iteration stalls, ...)
// are routed here. The default sink writes to stderr; passing an empty
// sink restores it.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace fjc
