#include "cpgd/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace cpgd::log {
namespace {

Level parse_level() {
  const char* env = std::getenv("CPGD_LOG");
  if (env == nullptr) {
    return Level::info;
  }
  const std::string v(env);
  if (v == "error") return Level::error;
  if (v == "debug") return Level::debug;
  return Level::info;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void emit(Level at, std::string_view tag, std::string_view msg) {
  if (static_cast<int>(at) > static_cast<int>(level())) {
    return;
  }
  std::lock_guard lock(sink_mutex());
  std::cerr << "[cpgd " << tag << "] " << msg << '\n';
}

}  // namespace

Level level() {
  static const Level lvl = parse_level();
  return lvl;
}

void error(std::string_view msg) { emit(Level::error, "error", msg); }
void info(std::string_view msg) { emit(Level::info, "info", msg); }
void debug(std::string_view msg) { emit(Level::debug, "debug", msg); }

}  // namespace cpgd::log
