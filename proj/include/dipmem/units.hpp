#pragma once

#include <string>
#include <string_view>

namespace dipmem {

enum class Dimension { time, length, rate, dimensionless };

/// Parses "<number> <unit>", e.g. "300 ns", "1 cm", "5e4 Hz_angular".
/// Rates accept Hz_angular, kHz_angular, MHz_angular, GHz_angular and rad/s
/// (angular) as well as Hz, kHz, MHz, GHz (cyclic, multiplied by 2 pi).
/// Dimensionless quantities take a bare number. Throws ConfigError naming
/// `field` on malformed text or a unit of the wrong dimension.
double parse_quantity(std::string_view text, Dimension dim, const std::string& field);

/// Canonical text for a value in SI base units ("1.0000000000000001e-07 s").
std::string format_quantity(double value, Dimension dim);

}  // namespace dipmem
