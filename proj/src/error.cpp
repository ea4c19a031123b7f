#include "qpost/error.hpp"

#include <cstdio>
#include <mutex>

namespace qpost {

namespace {

std::mutex g_warn_mutex;
WarningHandler g_handler;

} // namespace

void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard lock(g_warn_mutex);
    std::swap(g_handler, handler);
    return handler;
}

void warn(std::string_view message)
{
    std::lock_guard lock(g_warn_mutex);
    if (g_handler) {
        g_handler(message);
        return;
    }
    std::fprintf(stderr, "warning: %.*s\n", static_cast<int>(message.size()), message.data());
}

} // namespace qpost
