#include "dipmem/units.hpp"

#include "dipmem/errors.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <utility>

namespace dipmem {

namespace {
struct UnitEntry {
  std::string_view name;
  Dimension dim;
  double factor;
};

constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr UnitEntry unit_table[] = {
    {"s", Dimension::time, 1.0},
    {"ms", Dimension::time, 1e-3},
    {"us", Dimension::time, 1e-6},
    {"ns", Dimension::time, 1e-9},
    {"ps", Dimension::time, 1e-12},
    {"m", Dimension::length, 1.0},
    {"cm", Dimension::length, 1e-2},
    {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},
    {"Hz_angular", Dimension::rate, 1.0},
    {"rad/s", Dimension::rate, 1.0},
    {"kHz_angular", Dimension::rate, 1e3},
    {"MHz_angular", Dimension::rate, 1e6},
    {"GHz_angular", Dimension::rate, 1e9},
    {"Hz", Dimension::rate, two_pi},
    {"kHz", Dimension::rate, two_pi * 1e3},
    {"MHz", Dimension::rate, two_pi * 1e6},
    {"GHz", Dimension::rate, two_pi * 1e9},
};

const char* dimension_name(Dimension d) {
  switch (d) {
    case Dimension::time: return "time";
    case Dimension::length: return "length";
    case Dimension::rate: return "rate";
    case Dimension::dimensionless: return "dimensionless";
  }
  return "?";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}
}  // namespace

double parse_quantity(std::string_view text, Dimension dim, const std::string& field) {
  text = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc())
    throw ConfigError(fmt::format("{}: '{}' does not start with a number", field, text), field);
  if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: value is not finite", field), field);
  const std::string_view unit = trim(std::string_view(res.ptr, text.data() + text.size() - res.ptr));

  if (dim == Dimension::dimensionless) {
    if (!unit.empty())
      throw ConfigError(fmt::format("{}: expected a bare number, found unit '{}'", field, unit), field);
    return value;
  }
  if (unit.empty())
    throw ConfigError(fmt::format("{}: missing unit (a {} is required, e.g. '{}')", field, dimension_name(dim),
                                  format_quantity(1.0, dim)),
                      field);
  for (const auto& u : unit_table) {
    if (u.name != unit) continue;
    if (u.dim != dim)
      throw ConfigError(fmt::format("{}: unit '{}' is a {}, expected a {}", field, unit, dimension_name(u.dim),
                                    dimension_name(dim)),
                        field);
    return value * u.factor;
  }
  throw ConfigError(fmt::format("{}: unknown unit '{}'", field, unit), field);
}

std::string format_quantity(double value, Dimension dim) {
  switch (dim) {
    case Dimension::time: return fmt::format("{:.17g} s", value);
    case Dimension::length: return fmt::format("{:.17g} m", value);
    case Dimension::rate: return fmt::format("{:.17g} Hz_angular", value);
    case Dimension::dimensionless: return fmt::format("{:.17g}", value);
  }
  return {};
}

}  // namespace dipmem
