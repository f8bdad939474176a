#pragma once

#include <string>

namespace horoflow {

// Fixed "%.12g" rendering, so equal doubles produce identical bytes in
// every report regardless of run or thread count.
std::string format_real(double x);

} // namespace horoflow
