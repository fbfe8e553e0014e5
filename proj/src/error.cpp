#include "longnav/error.hpp"

#include <iostream>
#include <mutex>

namespace longnav {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view message) { std::clog << "warning: " << message << '\n'; };
  return h;
}

}  // namespace

void set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  handler() = h ? std::move(h) : [](std::string_view) {};
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  handler()(message);
}

}  // namespace longnav
