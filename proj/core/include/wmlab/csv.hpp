#pragma once

#include <cstdio>
#include <string>
#include <string_view>

namespace wmlab {

// All floats in report files carry 9 significant digits.
inline std::string fmt_g9(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

// Quotes a field when it contains the delimiter, a quote, or a newline.
inline std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(text);
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace wmlab
