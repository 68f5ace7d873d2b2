#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "defectchain/entanglement.hpp"
#include "defectchain/evolve.hpp"
#include "defectchain/perturbation.hpp"

namespace defectchain {

enum class ProtocolKind { bell, w, bound_pair };
enum class Frame { effective, full_chain };

/// One create-then-detune experiment.
///
/// bell:       defect_sites {n1, n2}, excitation starts on n1, n1 is detuned
///             with `rate`.
/// w:          defect_sites {n1, n1+1, n1+2}, starts on the middle site,
///             n1 detuned with `rate` (D1) and n1+1 with `rate_secondary` (D2).
/// bound_pair: defect_sites {n1}, pair starts on (n1-1, n1), `detuned_site`
///             (n1-1 or n1+1, default n1+1) detuned with `rate`.
///
/// Linear rates are energy/time (J^2 with J = 1), quadratic energy/time^2.
struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::bell;
  ChainSpec chain;
  std::vector<int> defect_sites;
  DetuningShape shape = DetuningShape::linear;
  double rate = 0.0;
  double rate_secondary = 0.0;
  int detuned_site = 0;
  Frame frame = Frame::effective;
  double horizon = 0.0;  // 0: creation instant plus one oscillation period
  std::size_t snapshots = 200;
  double tolerance = 1e-6;

  void validate() const;
};

struct WindowScore {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ProtocolResult {
  TimeSeries series;
  EffectiveModel model;
  double creation_time = 0.0;
  double horizon = 0.0;
  std::optional<BellBranch> branch;
  /// Observables of the state at the creation instant.
  std::map<std::string, double> at_creation;
  /// Per-channel statistics over t >= 0.9 horizon.
  std::map<std::string, WindowScore> final_window;
  /// Largest |P_site - ideal share| over the final window (1/2 Bell, 1/3 W).
  double max_probability_deviation = 0.0;
  double step = 0.0;
  double norm_drift_rate = 0.0;
  int refinements = 0;
  bool renormalized = false;
  std::vector<std::string> warnings;
};

ProtocolResult run_bell(const ProtocolSpec& spec);
ProtocolResult run_w(const ProtocolSpec& spec);
ProtocolResult run_bound_pair(const ProtocolSpec& spec);
/// Dispatch on spec.kind.
ProtocolResult run_protocol(const ProtocolSpec& spec);

/// Sites whose probabilities are reported, in column order.
std::vector<int> reported_sites(const ProtocolSpec& spec);

struct SweepRow {
  double value = 0.0;
  ProtocolResult result;
};

/// Names accepted by `sweep`: D, D1, D2, d, Delta, mu.
const std::vector<std::string>& sweep_parameters();

/// Copy of `base` with one parameter replaced.
ProtocolSpec with_parameter(const ProtocolSpec& base, const std::string& parameter, double value);

/// Runs every value (up to `jobs` at once); rows keep the input order.
std::vector<SweepRow> sweep(const ProtocolSpec& base, const std::string& parameter,
                            const std::vector<double>& values, unsigned jobs = 1);

std::string to_string(ProtocolKind kind);
std::string to_string(Frame frame);
std::string to_string(DetuningShape shape);

}  // namespace defectchain
