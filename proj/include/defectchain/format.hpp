#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "defectchain/evolve.hpp"

namespace defectchain {

/// Fixed notation with 12 significant digits, '.' separator, independent
/// of the global locale.
std::string format_number(double value);

/// CSV text: header `t,<channel>...`, one row per time.
std::string time_series_csv(const TimeSeries& series);

/// Write through a temporary sibling and rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace defectchain
