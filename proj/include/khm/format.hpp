#pragma once

#include <charconv>
#include <string>
#include <system_error>

#include "khm/core.hpp"

namespace khm {

/// Shortest decimal string that round-trips the double exactly. Used for every
/// CSV/JSON number so deterministic runs produce byte-identical files,
/// independent of locale and stream state.
inline std::string format_real(real v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace khm
