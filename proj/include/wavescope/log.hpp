#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace wavescope {

enum class LogLevel { Info, Warning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

namespace detail {
struct LogState {
    std::mutex mutex;
    LogSink sink;
};
inline LogState& log_state()
{
    static LogState state;
    return state;
}
} // namespace detail

/// Replace the process-wide sink. An empty sink restores stderr output.
inline void set_log_sink(LogSink sink)
{
    auto& st = detail::log_state();
    std::lock_guard lock(st.mutex);
    st.sink = std::move(sink);
}

inline void log(LogLevel level, std::string_view message)
{
    auto& st = detail::log_state();
    std::lock_guard lock(st.mutex);
    if (st.sink) {
        st.sink(level, message);
        return;
    }
    std::cerr << (level == LogLevel::Warning ? "warning: " : "info: ") << message << '\n';
}

inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_warning(std::string_view m) { log(LogLevel::Warning, m); }

} // namespace wavescope
