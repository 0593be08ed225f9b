#include "viramem/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace viramem {

namespace {

std::mutex g_mutex;

WarningSink& sink() {
  static WarningSink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(g_mutex);
  return std::exchange(sink(), std::move(next));
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (sink()) sink()(message);
}

}  // namespace viramem
