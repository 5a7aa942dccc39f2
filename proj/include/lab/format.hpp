#pragma once

#include <string>

namespace lab {

// Shortest round-trip decimal form; non-finite values print as inf, -inf, nan.
std::string num(double v);

} // namespace lab
