#include "fjc/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace fjc {
namespace {

std::mutex sink_mutex;

void to_stderr(std::string_view msg) {
    std::cerr << "fjc: warning: " << msg << '\n';
}

WarningSink& sink_ref() {
    static WarningSink sink = to_stderr;
    return sink;
}

}  // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex);
    sink_ref() = sink ? std::move(sink) : WarningSink(to_stderr);
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex);
    sink_ref()(message);
}

}  // namespace fjc
