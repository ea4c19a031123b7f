#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qpost {

enum class ErrorCode {
    InvalidArgument,
    Config,
    Numeric,
    OutOfRange,
    NoTransmission,
};

/// Every failure raised by the library carries one of the codes above; the
/// C layer maps them one-to-one onto qp_status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const std::string& what)
{
    if (!cond) fail(code, what);
}

// Non-fatal diagnostics (packet too close to the box edge, no barrier, ...).
using WarningHandler = std::function<void(std::string_view)>;

/// Installs a new handler and returns the previous one. An empty handler
/// restores the default, which prints to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

} // namespace qpost
