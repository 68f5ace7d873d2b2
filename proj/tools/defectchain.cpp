// defectchain: spectrum, protocol and sweep runs driven by a JSON config.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "defectchain/config.hpp"
#include "defectchain/errors.hpp"
#include "defectchain/format.hpp"

namespace fs = std::filesystem;
using namespace defectchain;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string frame;
  unsigned jobs = 1;
  long seed = 0;  // reserved; runs are deterministic
};

fs::path output_dir(const Options& opts, const RunConfig& cfg) {
  if (!opts.out_dir.empty()) return opts.out_dir;
  if (cfg.output_dir) return *cfg.output_dir;
  return ".";
}

void apply_frame(const Options& opts, RunConfig& cfg) {
  if (opts.frame.empty() || !cfg.protocol) return;
  cfg.protocol->frame = opts.frame == "full" ? Frame::full_chain : Frame::effective;
}

ordered_json scores_json(const ProtocolResult& r) {
  ordered_json j;
  j["creation_time"] = r.creation_time;
  j["horizon"] = r.horizon;
  j["branch"] = r.branch ? ordered_json(branch_label(*r.branch)) : ordered_json(nullptr);
  ordered_json created;
  for (const auto& [name, v] : r.at_creation) created[name] = v;
  j["at_creation"] = created;
  ordered_json window;
  for (const auto& [name, s] : r.final_window) {
    window[name] = {{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
  }
  j["final_window"] = window;
  j["max_probability_deviation"] = r.max_probability_deviation;
  ordered_json model;
  model["frequency"] = r.model.frequency;
  model["coupling"] = r.model.coupling;
  model["order"] = r.model.order;
  model["extrapolated"] = r.model.extrapolated;
  j["model"] = model;
  j["integrator"] = {{"step", r.step},
                     {"refinements", r.refinements},
                     {"norm_drift_rate", r.norm_drift_rate},
                     {"renormalized", r.renormalized}};
  j["warnings"] = r.warnings;
  return j;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

int cmd_spectrum(const RunConfig& cfg, const fs::path& out) {
  const int n = cfg.spectrum ? cfg.spectrum->excitations : 1;
  const SectorMatrix h = build_static(cfg.chain, n);
  const EigenSystem es = diagonalize(h);

  std::string eig;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) eig += format_number(es.values(i)) + "\n";

  ordered_json summary;
  summary["command"] = "spectrum";
  summary["config"] = config_to_json(cfg);
  summary["dimension"] = es.values.size();
  summary["warnings"] = cfg.chain.regime_warnings();

  std::string bands_csv = "band,center,half_width,expected_count,members,max_deviation\n";
  std::vector<BandPrediction> layout;
  std::string band_note;
  if (n > 0) {
    try {
      layout = band_layout(cfg.chain, n);
    } catch (const DomainError& e) {
      band_note = e.what();
    }
  }
  if (!layout.empty()) {
    const double tol = cfg.spectrum && cfg.spectrum->band_tolerance ? *cfg.spectrum->band_tolerance
                                                                    : band_tolerance(cfg.chain);
    const BandAssignment a = assign_bands(es.values, layout, tol);
    for (std::size_t b = 0; b < layout.size(); ++b) {
      bands_csv += layout[b].label + "," + format_number(layout[b].center) + "," +
                   format_number(layout[b].half_width) + "," +
                   std::to_string(layout[b].expected_count) + "," +
                   std::to_string(a.bands[b].members) + "," +
                   format_number(a.bands[b].max_deviation) + "\n";
    }
    summary["band_tolerance"] = tol;
    summary["unassigned"] = a.unassigned;
    summary["ambiguous"] = a.ambiguous;
  } else {
    summary["band_report"] = band_note.empty() ? "no bands for an empty sector" : band_note;
  }

  fs::create_directories(out);
  write_file_atomic(out / "eigenvalues.txt", eig);
  write_file_atomic(out / "bands.csv", bands_csv);
  write_file_atomic(out / "summary.json", dump(summary));
  std::cout << "spectrum: " << es.values.size() << " eigenvalues written to " << out.string()
            << "\n";
  return kExitOk;
}

int cmd_protocol(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.protocol) throw ConfigError("protocol", 0, "section required for this command");
  const ProtocolResult r = run_protocol(*cfg.protocol);

  ordered_json summary;
  summary["command"] = "protocol";
  summary["frame"] = to_string(cfg.protocol->frame);
  summary["config"] = config_to_json(cfg);
  summary["result"] = scores_json(r);

  fs::create_directories(out);
  write_file_atomic(out / "timeseries.csv", time_series_csv(r.series));
  write_file_atomic(out / "summary.json", dump(summary));
  std::cout << "protocol " << to_string(cfg.protocol->kind) << ": creation at t="
            << format_number(r.creation_time) << ", outputs in " << out.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out, unsigned jobs) {
  if (!cfg.protocol) throw ConfigError("protocol", 0, "section required for this command");
  if (!cfg.sweep) throw ConfigError("sweep", 0, "section required for this command");
  if (cfg.sweep->values.empty()) throw ConfigError("sweep.values", 0, "at least one value needed");
  const auto rows = sweep(*cfg.protocol, cfg.sweep->parameter, cfg.sweep->values, jobs);

  // Columns follow the channel order of the first result; every row shares it.
  std::vector<std::string> channels;
  for (const auto& [name, s] : rows.front().result.final_window) channels.push_back(name);
  std::string csv = cfg.sweep->parameter + ",creation_time";
  for (const auto& c : channels) csv += "," + c + "_mean," + c + "_min," + c + "_max";
  csv += ",max_probability_deviation\n";
  ordered_json results = ordered_json::array();
  for (const auto& row : rows) {
    csv += format_number(row.value) + "," + format_number(row.result.creation_time);
    for (const auto& c : channels) {
      const WindowScore& s = row.result.final_window.at(c);
      csv += "," + format_number(s.mean) + "," + format_number(s.min) + "," + format_number(s.max);
    }
    csv += "," + format_number(row.result.max_probability_deviation) + "\n";
    ordered_json entry = scores_json(row.result);
    entry["value"] = row.value;
    results.push_back(entry);
  }

  ordered_json summary;
  summary["command"] = "sweep";
  summary["frame"] = to_string(cfg.protocol->frame);
  summary["config"] = config_to_json(cfg);
  summary["rows"] = results;

  fs::create_directories(out);
  write_file_atomic(out / "sweep.csv", csv);
  write_file_atomic(out / "summary.json", dump(summary));
  std::cout << "sweep over " << cfg.sweep->parameter << ": " << rows.size() << " rows written to "
            << out.string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, Options& opts) {
  sub->add_option("--config", opts.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", opts.out_dir, "Output directory (overrides output.dir)");
  sub->add_option("--frame", opts.frame, "Protocol frame (overrides protocol.frame)")
      ->check(CLI::IsMember({"effective", "full"}));
  sub->add_option("--jobs", opts.jobs, "Parallel sweep workers")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", opts.seed, "Reserved; runs are deterministic");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defect spin chain simulator: spectra, entangling protocols and parameter sweeps"};
  app.require_subcommand(1);
  Options opts;
  opts.jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues and band report of one sector");
  auto* protocol = app.add_subcommand("protocol", "Run one Bell, W or bound-pair protocol");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a protocol over a list of parameter values");
  for (auto* sub : {spectrum, protocol, sweep_cmd}) add_common(sub, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = load_config(opts.config_path);
    apply_frame(opts, cfg);
    for (const auto& w : cfg.chain.regime_warnings()) std::cerr << "warning: " << w << "\n";
    const fs::path out = output_dir(opts, cfg);
    if (spectrum->parsed()) return cmd_spectrum(cfg, out);
    if (protocol->parsed()) return cmd_protocol(cfg, out);
    return cmd_sweep(cfg, out, opts.jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (last stable step "
              << e.last_stable_step() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
