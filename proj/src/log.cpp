#include "isym/log.hpp"

#include <cstdio>
#include <mutex>

namespace isym {

namespace {

std::mutex g_mutex;
WarningSink g_sink;

}  // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void warn(const std::string& message) {
    std::lock_guard lock(g_mutex);
    if (g_sink) {
        g_sink(message);
    } else {
        std::fprintf(stderr, "warning: %s\n", message.c_str());
    }
}

}  // namespace isym
