#pragma once

#include <functional>
#include <string>

namespace isym {

/// Non-fatal diagnostics. The default sink writes "warning: ..." to stderr.
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace isym
