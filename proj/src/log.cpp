#include "csr/log.hpp"

#include <cstdlib>

namespace csr {

namespace {

LogLevel parse_env() {
    const char* v = std::getenv("CSR_LOG");
    if (!v) return LogLevel::Info;
    std::string s(v);
    if (s == "error") return LogLevel::Error;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

LogLevel& level_ref() {
    static LogLevel lv = parse_env();
    return lv;
}

}  // namespace

LogLevel log_level() { return level_ref(); }

void set_log_level(LogLevel lv) { level_ref() = lv; }

namespace detail {

void log_line(LogLevel lv, const std::string& msg) {
    if (static_cast<int>(lv) > static_cast<int>(log_level())) return;
    const char* tag = lv == LogLevel::Error ? "E" : lv == LogLevel::Info ? "I" : "D";
    std::cerr << "[csr " << tag << "] " << msg << "\n";
}

}  // namespace detail

}  // namespace csr
