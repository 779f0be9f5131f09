#pragma once

// Parsing of physical quantities with explicit unit suffixes into the
// internal convention: angular frequencies in rad/s, times in s, angles in
// rad, fields in T. Cycle frequencies (Hz) are multiplied by 2 pi.

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>

#include "qslsense/policy.hpp"

namespace qsl::units {

enum class Dimension { frequency, time, angle, field, dimensionless };

inline const char *dimension_name(Dimension d) {
    switch (d) {
        case Dimension::frequency:
            return "frequency";
        case Dimension::time:
            return "time";
        case Dimension::angle:
            return "angle";
        case Dimension::field:
            return "magnetic field";
        case Dimension::dimensionless:
            return "dimensionless";
    }
    return "?";
}

inline const char *unit_examples(Dimension d) {
    switch (d) {
        case Dimension::frequency:
            return "Hz, kHz, MHz, GHz, THz, rad/s, krad/s, Mrad/s, Grad/s";
        case Dimension::time:
            return "s, ms, us, ns, ps";
        case Dimension::angle:
            return "deg, rad";
        case Dimension::field:
            return "T, mT, uT";
        case Dimension::dimensionless:
            return "(none)";
    }
    return "";
}

inline const std::map<std::string, double, std::less<>> &unit_table(Dimension d) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    static const std::map<std::string, double, std::less<>> frequency{
        {"Hz", two_pi},         {"kHz", two_pi * 1e3},  {"MHz", two_pi * 1e6},  {"GHz", two_pi * 1e9},
        {"THz", two_pi * 1e12}, {"rad/s", 1.0},         {"krad/s", 1e3},        {"Mrad/s", 1e6},
        {"Grad/s", 1e9}};
    static const std::map<std::string, double, std::less<>> time{
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"\xC2\xB5s", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
    static const std::map<std::string, double, std::less<>> angle{{"deg", std::numbers::pi / 180.0}, {"rad", 1.0}};
    static const std::map<std::string, double, std::less<>> field{{"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}};
    static const std::map<std::string, double, std::less<>> none{{"", 1.0}};
    switch (d) {
        case Dimension::frequency:
            return frequency;
        case Dimension::time:
            return time;
        case Dimension::angle:
            return angle;
        case Dimension::field:
            return field;
        case Dimension::dimensionless:
            return none;
    }
    return none;
}

/// Parses "<number><unit>" (whitespace between the two allowed) for the
/// named field. A missing or unknown unit is a ConfigError naming the field.
inline double parse_quantity(std::string_view text, Dimension dim, std::string_view field_name) {
    auto fail = [&](const std::string &why) -> double {
        throw ConfigError("--" + std::string(field_name) + ": " + why + " in '" + std::string(text) +
                          "' (expected a " + dimension_name(dim) + " with unit " + unit_examples(dim) + ")");
    };
    std::size_t b = 0;
    while (b < text.size() && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    const std::string_view body = text.substr(b);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
    if (ec != std::errc{} || ptr == body.data()) return fail("no leading number");
    if (!std::isfinite(value)) return fail("non-finite value");
    std::string_view unit(ptr, static_cast<std::size_t>(body.data() + body.size() - ptr));
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.front()))) unit.remove_prefix(1);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.remove_suffix(1);
    const auto &table = unit_table(dim);
    const auto it = table.find(unit);
    if (it == table.end()) return fail(unit.empty() ? "missing unit" : "unknown unit '" + std::string(unit) + "'");
    return value * it->second;
}

}  // namespace qsl::units
