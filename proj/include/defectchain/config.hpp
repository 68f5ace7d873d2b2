#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "defectchain/protocols.hpp"

namespace defectchain {

inline constexpr const char* kSchemaVersion = "1";

/// Schema or syntax problem in a run configuration.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& message);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

struct SpectrumSettings {
  int excitations = 1;
  std::optional<double> band_tolerance;
};

struct SweepSettings {
  std::string parameter;
  std::vector<double> values;
};

/// Parsed run document. Energies are in units of J (J = 1), times in 1/J.
struct RunConfig {
  std::string schema_version = kSchemaVersion;
  ChainSpec chain;
  std::optional<SpectrumSettings> spectrum;
  std::optional<ProtocolSpec> protocol;  // protocol->chain mirrors `chain`
  std::optional<SweepSettings> sweep;
  std::optional<std::string> output_dir;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical document with all defaults filled in; parse_config accepts it.
nlohmann::ordered_json config_to_json(const RunConfig& config);

}  // namespace defectchain
