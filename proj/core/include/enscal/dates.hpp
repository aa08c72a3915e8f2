#pragma once

#include <string>

namespace enscal {

/// Serial day number (days since 1970-01-01) for a proleptic Gregorian date.
long civil_to_serial(int year, int month, int day);

void serial_to_civil(long serial, int& year, int& month, int& day);

/// Parses "YYYY-MM-DD".  Throws std::invalid_argument on malformed input.
long parse_date(const std::string& text);

std::string format_date(long serial);

} // namespace enscal
