#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace csr {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from the CSR_LOG env var: error|info|debug. Default info.
LogLevel log_level();
void set_log_level(LogLevel lv);

namespace detail {
void log_line(LogLevel lv, const std::string& msg);
}

template <typename... Args>
void log_error(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    detail::log_line(LogLevel::Error, os.str());
}

template <typename... Args>
void log_info(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    detail::log_line(LogLevel::Info, os.str());
}

template <typename... Args>
void log_debug(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    detail::log_line(LogLevel::Debug, os.str());
}

}  // namespace csr
