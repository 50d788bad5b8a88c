#pragma once

#include <string_view>

namespace cpgd::log {

enum class Level { error = 0, info = 1, debug = 2 };

// Read once from CPGD_LOG (error | info | debug); defaults to info.
Level level();

void error(std::string_view msg);
void info(std::string_view msg);
void debug(std::string_view msg);

}  // namespace cpgd::log
