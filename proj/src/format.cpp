#include "defectchain/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

#include "defectchain/errors.hpp"

namespace defectchain {

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  constexpr int kDigits = 12;
  int decimals = kDigits - 1;
  if (value != 0.0) {
    const int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
    decimals = std::max(0, kDigits - 1 - exponent);
  }
  char buf[512];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw DomainError("number formatting overflow");
  std::string out(buf, end);
  if (out == "-0" || out.find_first_not_of("-0.") == std::string::npos) {
    if (out.front() == '-') out.erase(0, 1);
  }
  return out;
}

std::string time_series_csv(const TimeSeries& series) {
  std::string out = "t";
  for (const auto& name : series.names) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out += format_number(series.times[i]);
    for (const auto& column : series.values) out += "," + format_number(column[i]);
    out += "\n";
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << contents;
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace defectchain
