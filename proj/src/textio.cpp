#include "horoflow/textio.hpp"

#include <cstdio>

namespace horoflow {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace horoflow
