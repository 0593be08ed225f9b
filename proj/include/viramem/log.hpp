#pragma once

#include <functional>
#include <string>

namespace viramem {

using WarningSink = std::function<void(const std::string&)>;

/// Routes library warnings (duplicate embedding tokens, deleted posts, ...).
/// Default writes "warning: <msg>" to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace viramem
