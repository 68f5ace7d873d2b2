#include "defectchain/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace defectchain {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(const std::string& key, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? "" : key + ": ") + message),
      key_(key),
      line_(line) {}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  /// Best-effort source line of the first occurrence of "key".
  int line_of(const std::string& path) const {
    const auto dot = path.find_last_of('.');
    std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    if (const auto br = key.find('['); br != std::string::npos) key.resize(br);
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path, line_of(path), message);
  }

  void require_object(const json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void check_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : j.items()) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                  [&](const char* a) { return key == a; });
      if (!ok) {
        std::string list;
        for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        fail(join(path, key), "unknown key (allowed: " + list + ")");
      }
    }
  }

  double number(const json& j, const std::string& path, const char* key, double fallback) const {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(join(path, key), "expected a finite number");
    return x;
  }

  long integer(const json& j, const std::string& path, const char* key, long fallback) const {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<long>();
  }

  std::string string(const json& j, const std::string& path, const char* key,
                     const std::string& fallback) const {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  const std::string& text_;
};

ChainSpec parse_chain(const Reader& r, const json& j) {
  const std::string path = "chain";
  r.require_object(j, path);
  r.check_keys(j, path, {"sites", "Delta", "epsilon", "boundary", "defects"});
  ChainSpec c;
  c.hopping = 1.0;
  if (!j.contains("sites")) r.fail(path + ".sites", "required key missing");
  c.sites = static_cast<int>(r.integer(j, path, "sites", 8));
  c.anisotropy = r.number(j, path, "Delta", 0.0);
  c.level_spacing = r.number(j, path, "epsilon", 1000.0);
  const std::string boundary = r.string(j, path, "boundary", "periodic");
  if (boundary == "periodic") {
    c.boundary = Boundary::periodic;
  } else if (boundary == "open") {
    c.boundary = Boundary::open;
  } else {
    r.fail(path + ".boundary", "expected \"periodic\" or \"open\"");
  }
  if (j.contains("defects")) {
    const json& d = j.at("defects");
    if (!d.is_array()) r.fail(path + ".defects", "expected an array of {site, offset}");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string p = path + ".defects[" + std::to_string(i) + "]";
      r.require_object(d[i], p);
      r.check_keys(d[i], p, {"site", "offset"});
      if (!d[i].contains("site") || !d[i].contains("offset")) r.fail(p, "needs site and offset");
      const int site = static_cast<int>(r.integer(d[i], p, "site", 0));
      const double offset = r.number(d[i], p, "offset", 0.0);
      if (c.defects.count(site)) r.fail(p + ".site", "defect site listed twice");
      c.defects[site] = offset;
    }
  }
  try {
    c.validate();
  } catch (const std::exception& e) {
    r.fail(path, e.what());
  }
  return c;
}

ProtocolSpec parse_protocol(const Reader& r, const json& j, const ChainSpec& chain) {
  const std::string path = "protocol";
  r.require_object(j, path);
  r.check_keys(j, path,
               {"kind", "defect_sites", "shape", "rate", "rate_secondary", "detuned_site", "frame",
                "horizon", "snapshots", "tolerance"});
  ProtocolSpec p;
  p.chain = chain;
  const std::string kind = r.string(j, path, "kind", "");
  if (kind == "bell") {
    p.kind = ProtocolKind::bell;
  } else if (kind == "w") {
    p.kind = ProtocolKind::w;
  } else if (kind == "bound_pair") {
    p.kind = ProtocolKind::bound_pair;
  } else {
    r.fail(path + ".kind", "expected \"bell\", \"w\" or \"bound_pair\"");
  }
  if (!j.contains("defect_sites") || !j.at("defect_sites").is_array()) {
    r.fail(path + ".defect_sites", "expected an array of site labels");
  }
  for (const auto& s : j.at("defect_sites")) {
    if (!s.is_number_integer()) r.fail(path + ".defect_sites", "site labels must be integers");
    p.defect_sites.push_back(s.get<int>());
  }
  const std::string shape = r.string(j, path, "shape", "linear");
  if (shape == "none") {
    p.shape = DetuningShape::none;
  } else if (shape == "linear") {
    p.shape = DetuningShape::linear;
  } else if (shape == "quadratic") {
    p.shape = DetuningShape::quadratic;
  } else {
    r.fail(path + ".shape", "expected \"none\", \"linear\" or \"quadratic\"");
  }
  p.rate = r.number(j, path, "rate", 0.0);
  p.rate_secondary = r.number(j, path, "rate_secondary", 0.0);
  p.detuned_site = static_cast<int>(r.integer(j, path, "detuned_site", 0));
  const std::string frame = r.string(j, path, "frame", "effective");
  if (frame == "effective") {
    p.frame = Frame::effective;
  } else if (frame == "full") {
    p.frame = Frame::full_chain;
  } else {
    r.fail(path + ".frame", "expected \"effective\" or \"full\"");
  }
  p.horizon = r.number(j, path, "horizon", 0.0);
  const long snaps = r.integer(j, path, "snapshots", 200);
  if (snaps < 1) r.fail(path + ".snapshots", "must be at least 1");
  p.snapshots = static_cast<std::size_t>(snaps);
  p.tolerance = r.number(j, path, "tolerance", 1e-6);
  try {
    p.validate();
  } catch (const std::exception& e) {
    r.fail(path, e.what());
  }
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const int line =
        1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const Reader r(text);
  r.require_object(j, "");
  r.check_keys(j, "", {"schema_version", "chain", "spectrum", "protocol", "sweep", "output"});

  RunConfig cfg;
  if (!j.contains("schema_version")) r.fail("schema_version", "required key missing");
  cfg.schema_version = r.string(j, "", "schema_version", "");
  if (cfg.schema_version != kSchemaVersion) {
    r.fail("schema_version", "unsupported version \"" + cfg.schema_version + "\" (expected \"" +
                                 kSchemaVersion + "\")");
  }
  if (!j.contains("chain")) r.fail("chain", "required key missing");
  cfg.chain = parse_chain(r, j.at("chain"));

  if (j.contains("spectrum")) {
    const json& s = j.at("spectrum");
    r.require_object(s, "spectrum");
    r.check_keys(s, "spectrum", {"excitations", "band_tolerance"});
    SpectrumSettings ss;
    ss.excitations = static_cast<int>(r.integer(s, "spectrum", "excitations", 1));
    if (ss.excitations < 0 || ss.excitations > cfg.chain.sites) {
      r.fail("spectrum.excitations", "must lie in 0..sites");
    }
    if (s.contains("band_tolerance")) {
      ss.band_tolerance = r.number(s, "spectrum", "band_tolerance", 0.0);
      if (*ss.band_tolerance < 0.0) r.fail("spectrum.band_tolerance", "must be non-negative");
    }
    cfg.spectrum = ss;
  }
  if (j.contains("protocol")) cfg.protocol = parse_protocol(r, j.at("protocol"), cfg.chain);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    r.require_object(s, "sweep");
    r.check_keys(s, "sweep", {"parameter", "values"});
    SweepSettings ss;
    ss.parameter = r.string(s, "sweep", "parameter", "");
    const auto& allowed = sweep_parameters();
    if (std::find(allowed.begin(), allowed.end(), ss.parameter) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      r.fail("sweep.parameter", "unknown parameter \"" + ss.parameter + "\" (allowed: " + list + ")");
    }
    if (!s.contains("values") || !s.at("values").is_array()) {
      r.fail("sweep.values", "expected an array of numbers");
    }
    for (const auto& v : s.at("values")) {
      if (!v.is_number()) r.fail("sweep.values", "expected an array of numbers");
      ss.values.push_back(v.get<double>());
    }
    cfg.sweep = ss;
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    r.require_object(o, "output");
    r.check_keys(o, "output", {"dir"});
    if (o.contains("dir")) cfg.output_dir = r.string(o, "output", "dir", "");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", 0, "cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json j;
  j["schema_version"] = config.schema_version;
  ordered_json chain;
  chain["sites"] = config.chain.sites;
  chain["Delta"] = config.chain.anisotropy;
  chain["epsilon"] = config.chain.level_spacing;
  chain["boundary"] = config.chain.boundary == Boundary::periodic ? "periodic" : "open";
  chain["defects"] = ordered_json::array();
  for (const auto& [site, offset] : config.chain.defects) {
    chain["defects"].push_back({{"site", site}, {"offset", offset}});
  }
  j["chain"] = chain;
  if (config.spectrum) {
    ordered_json s;
    s["excitations"] = config.spectrum->excitations;
    if (config.spectrum->band_tolerance) s["band_tolerance"] = *config.spectrum->band_tolerance;
    j["spectrum"] = s;
  }
  if (config.protocol) {
    const ProtocolSpec& p = *config.protocol;
    ordered_json s;
    s["kind"] = to_string(p.kind);
    s["defect_sites"] = p.defect_sites;
    s["shape"] = to_string(p.shape);
    s["rate"] = p.rate;
    s["rate_secondary"] = p.rate_secondary;
    s["detuned_site"] = p.detuned_site;
    s["frame"] = to_string(p.frame);
    s["horizon"] = p.horizon;
    s["snapshots"] = p.snapshots;
    s["tolerance"] = p.tolerance;
    j["protocol"] = s;
  }
  if (config.sweep) {
    j["sweep"] = {{"parameter", config.sweep->parameter}, {"values", config.sweep->values}};
  }
  if (config.output_dir) j["output"] = {{"dir", *config.output_dir}};
  return j;
}

}  // namespace defectchain
