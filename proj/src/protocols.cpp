#include "defectchain/protocols.hpp"

#include <algorithm>
#include <limits>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>

#include "defectchain/errors.hpp"

namespace defectchain {

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::bell: return "bell";
    case ProtocolKind::w: return "w";
    case ProtocolKind::bound_pair: return "bound_pair";
  }
  return "bell";
}

std::string to_string(Frame frame) {
  return frame == Frame::effective ? "effective" : "full";
}

std::string to_string(DetuningShape shape) {
  switch (shape) {
    case DetuningShape::none: return "none";
    case DetuningShape::linear: return "linear";
    case DetuningShape::quadratic: return "quadratic";
  }
  return "none";
}

void ProtocolSpec::validate() const {
  chain.validate();
  if (snapshots == 0) throw DomainError("snapshot count must be positive");
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
  if (!(rate >= 0.0) || !(rate_secondary >= 0.0)) throw DomainError("detuning rates must be >= 0");
  if (!(horizon >= 0.0)) throw DomainError("horizon must be non-negative");
  const int L = chain.sites;
  switch (kind) {
    case ProtocolKind::bell:
      if (defect_sites.size() != 2) throw DomainError("bell protocol needs two defect sites");
      break;
    case ProtocolKind::w:
      if (defect_sites.size() != 3) throw DomainError("w protocol needs three defect sites");
      if (wrap_site(defect_sites[1], L) != wrap_site(defect_sites[0] + 1, L) ||
          wrap_site(defect_sites[2], L) != wrap_site(defect_sites[0] + 2, L)) {
        throw DomainError("w protocol needs three adjacent defects n1, n1+1, n1+2");
      }
      break;
    case ProtocolKind::bound_pair: {
      if (defect_sites.size() != 1) throw DomainError("bound_pair protocol needs one defect site");
      const int n1 = defect_sites[0];
      if (detuned_site != 0 && wrap_site(detuned_site, L) != wrap_site(n1 - 1, L) &&
          wrap_site(detuned_site, L) != wrap_site(n1 + 1, L)) {
        throw DomainError("bound_pair detuned site must be n1-1 or n1+1");
      }
      break;
    }
  }
}

std::vector<int> reported_sites(const ProtocolSpec& spec) {
  const int L = spec.chain.sites;
  std::vector<int> out;
  if (spec.kind == ProtocolKind::bound_pair) {
    const int n1 = spec.defect_sites.at(0);
    out = {wrap_site(n1 - 1, L), wrap_site(n1, L), wrap_site(n1 + 1, L)};
  } else {
    for (int s : spec.defect_sites) out.push_back(wrap_site(s, L));
  }
  return out;
}

namespace {

struct Setup {
  EffectiveModel model;
  int excitations = 1;
  Configuration initial;
  double creation_time = 0.0;
  DetuningSchedule schedule;  // start times set to creation_time
  /// Builds the scoring target on a basis for a given Bell branch.
  std::function<StateVector(BasisPtr, BellBranch)> target;
  bool has_branch = true;
  std::vector<int> phase_sites;
  std::vector<std::pair<int, int>> concurrence_pairs;
  /// (site, ideal probability) checked in the final window.
  std::vector<std::pair<int, double>> shares;
};

bool schedule_inert(const DetuningSchedule& s) {
  return std::all_of(s.begin(), s.end(), [](const SiteDetuning& e) {
    return e.shape == DetuningShape::none || e.rate == 0.0;
  });
}

ProtocolResult execute(const ProtocolSpec& spec, Setup setup) {
  ProtocolResult result;
  result.model = setup.model;
  result.creation_time = setup.creation_time;
  result.warnings = setup.model.warnings;
  const double horizon = spec.horizon > 0.0
                             ? spec.horizon
                             : setup.creation_time + 2.0 * std::numbers::pi / setup.model.frequency;
  if (!(horizon > setup.creation_time)) {
    throw DomainError("horizon must exceed the creation instant " +
                      std::to_string(setup.creation_time));
  }
  result.horizon = horizon;

  SectorMatrix h = spec.frame == Frame::effective
                       ? SectorMatrix{setup.model.basis, setup.model.matrix}
                       : build_static(spec.chain, setup.excitations);
  const BasisPtr basis = h.basis;
  const StateVector psi0 = StateVector::basis_state(basis, setup.initial);
  const EigenSystem eig = diagonalize(h);

  // Uniform grid plus the creation instant itself.
  std::vector<double> times = uniform_times(0.0, horizon, spec.snapshots);
  const double tc = setup.creation_time;
  const bool on_grid = std::any_of(times.begin(), times.end(),
                                   [&](double t) { return std::abs(t - tc) <= 1e-12 * horizon; });
  if (!on_grid) times.insert(std::upper_bound(times.begin(), times.end(), tc), tc);
  for (double& t : times)
    if (std::abs(t - tc) <= 1e-12 * horizon) t = tc;

  std::vector<StateVector> states;
  states.reserve(times.size());
  const bool inert = schedule_inert(setup.schedule);
  std::size_t first_dynamic = times.size();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!inert && times[i] > tc) {
      first_dynamic = i;
      break;
    }
    states.push_back(propagate_static(eig, psi0, times[i]));
  }
  const StateVector created = propagate_static(eig, psi0, tc);
  if (first_dynamic < times.size()) {
    std::vector<double> dyn_times{tc};
    dyn_times.insert(dyn_times.end(), times.begin() + static_cast<long>(first_dynamic), times.end());
    PropagationOptions options;
    options.tolerance = spec.tolerance;
    const ScheduledEvolution evo =
        propagate_scheduled(DrivenHamiltonian{h, setup.schedule}, created, dyn_times, options);
    for (std::size_t i = 1; i < evo.states.size(); ++i) states.push_back(evo.states[i]);
    result.step = evo.step;
    result.norm_drift_rate = evo.norm_drift_rate;
    result.refinements = evo.refinements;
    result.renormalized = evo.renormalized;
    for (const auto& line : evo.log) result.warnings.push_back(line);
  }

  BellBranch branch = BellBranch::plus;
  if (setup.has_branch) {
    double best = -1.0;
    for (BellBranch b : kAllBranches) {
      const double f = fidelity(created, setup.target(basis, b));
      if (f > best + 1e-12) {
        best = f;
        branch = b;
      }
    }
    result.branch = branch;
  }
  const StateVector target = setup.target(basis, branch);

  const std::vector<int> sites = reported_sites(spec);
  auto observe = [&](const StateVector& psi) {
    std::vector<std::pair<std::string, double>> row;
    const auto probs = site_probabilities(psi);
    for (int s : sites) row.emplace_back("P_site_" + std::to_string(s), probs[s - 1]);
    row.emplace_back("fid_raw", fidelity(psi, target));
    row.emplace_back("fid_phase", phase_maximized_fidelity(psi, target, setup.phase_sites));
    double c = 1.0;
    for (const auto& [a, b] : setup.concurrence_pairs) {
      c = std::min(c, concurrence(reduce(psi, {a, b})));
    }
    row.emplace_back("concurrence", c);
    row.emplace_back("Q", global_entanglement(psi));
    return row;
  };

  result.series.times = times;
  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto row = observe(states[i]);
    if (i == 0) {
      for (const auto& [name, v] : row) names.push_back(name);
      columns.resize(row.size());
    }
    for (std::size_t k = 0; k < row.size(); ++k) columns[k].push_back(row[k].second);
  }
  for (std::size_t k = 0; k < names.size(); ++k) result.series.add_channel(names[k], columns[k]);
  for (const auto& [name, v] : observe(created)) result.at_creation[name] = v;

  const double window_start = 0.9 * horizon;
  for (std::size_t k = 0; k < names.size(); ++k) {
    WindowScore score{0.0, std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    std::size_t count = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < window_start) continue;
      const double v = columns[k][i];
      score.mean += v;
      score.min = std::min(score.min, v);
      score.max = std::max(score.max, v);
      ++count;
    }
    score.mean /= static_cast<double>(std::max<std::size_t>(count, 1));
    result.final_window[names[k]] = score;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_start) continue;
    const auto probs = site_probabilities(states[i]);
    for (const auto& [site, share] : setup.shares) {
      worst = std::max(worst, std::abs(probs[site - 1] - share));
    }
  }
  result.max_probability_deviation = worst;
  return result;
}

}  // namespace

ProtocolResult run_bell(const ProtocolSpec& spec) {
  spec.validate();
  if (spec.kind != ProtocolKind::bell) throw DomainError("run_bell needs a bell spec");
  const int L = spec.chain.sites;
  const int n1 = wrap_site(spec.defect_sites[0], L);
  const int n2 = wrap_site(spec.defect_sites[1], L);
  Setup s;
  s.model = two_defect_model(spec.chain, n1, n2);
  s.excitations = 1;
  s.initial = Configuration::from_sites({n1}, L);
  s.creation_time = bell_times(s.model, 1).front();
  s.schedule = {SiteDetuning{n1, spec.shape, spec.rate, s.creation_time}};
  s.target = [=](BasisPtr b, BellBranch br) { return bell_target(std::move(b), n1, n2, br); };
  s.phase_sites = {n1, n2};
  s.concurrence_pairs = {{n1, n2}};
  s.shares = {{n1, 0.5}, {n2, 0.5}};
  return execute(spec, std::move(s));
}

ProtocolResult run_w(const ProtocolSpec& spec) {
  spec.validate();
  if (spec.kind != ProtocolKind::w) throw DomainError("run_w needs a w spec");
  const int L = spec.chain.sites;
  const int n1 = wrap_site(spec.defect_sites[0], L);
  const int n2 = wrap_site(n1 + 1, L);
  const int n3 = wrap_site(n1 + 2, L);
  Setup s;
  s.model = three_defect_model(spec.chain, n1);
  s.excitations = 1;
  s.initial = Configuration::from_sites({n2}, L);
  s.creation_time = w_times(s.model, 0).front();
  s.schedule = {SiteDetuning{n1, spec.shape, spec.rate, s.creation_time},
                SiteDetuning{n2, spec.shape, spec.rate_secondary, s.creation_time}};
  s.target = [=](BasisPtr b, BellBranch) { return w_target(std::move(b), n1, n2, n3); };
  s.has_branch = false;
  s.phase_sites = {n1, n2, n3};
  s.concurrence_pairs = {{n1, n2}, {n2, n3}, {n1, n3}};
  s.shares = {{n1, 1.0 / 3.0}, {n2, 1.0 / 3.0}, {n3, 1.0 / 3.0}};
  return execute(spec, std::move(s));
}

ProtocolResult run_bound_pair(const ProtocolSpec& spec) {
  spec.validate();
  if (spec.kind != ProtocolKind::bound_pair) throw DomainError("run_bound_pair needs a bound_pair spec");
  const int L = spec.chain.sites;
  const int n1 = wrap_site(spec.defect_sites[0], L);
  const int left = wrap_site(n1 - 1, L);
  const int right = wrap_site(n1 + 1, L);
  const int detuned = spec.detuned_site == 0 ? right : wrap_site(spec.detuned_site, L);
  Setup s;
  s.model = bound_pair_model(spec.chain, n1);
  s.excitations = 2;
  s.initial = Configuration::from_sites({left, n1}, L);
  s.creation_time = bound_pair_times(s.model, 1).front();
  s.schedule = {SiteDetuning{detuned, spec.shape, spec.rate, s.creation_time}};
  s.target = [=](BasisPtr b, BellBranch br) {
    return bound_pair_bell_target(std::move(b), n1, br);
  };
  s.phase_sites = {left, right};
  s.concurrence_pairs = {{left, right}};
  s.shares = {{left, 0.5}, {right, 0.5}};
  const SiteDetuning ramp = s.schedule.front();
  const double crossing = spec.chain.hopping * spec.chain.anisotropy + spec.chain.defect_offset(n1);
  ProtocolResult r = execute(spec, std::move(s));
  // Beyond J Delta + d the undetuned pair state meets the split configuration
  // at first order and the pair dissociates.
  if (ramp.offset_at(r.horizon) >= crossing) {
    r.warnings.push_back("detuning reaches J*Delta + d = " + std::to_string(crossing) +
                         " before the horizon; the pair leaks into split configurations");
  }
  return r;
}

ProtocolResult run_protocol(const ProtocolSpec& spec) {
  switch (spec.kind) {
    case ProtocolKind::bell: return run_bell(spec);
    case ProtocolKind::w: return run_w(spec);
    case ProtocolKind::bound_pair: return run_bound_pair(spec);
  }
  throw DomainError("unknown protocol kind");
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"D", "D1", "D2", "d", "Delta", "mu"};
  return names;
}

ProtocolSpec with_parameter(const ProtocolSpec& base, const std::string& parameter, double value) {
  ProtocolSpec out = base;
  if (parameter == "D") {
    if (base.kind == ProtocolKind::w) throw DomainError("use D1 or D2 for the w protocol");
    out.rate = value;
  } else if (parameter == "D1" || parameter == "D2") {
    if (base.kind != ProtocolKind::w) throw DomainError(parameter + " applies to the w protocol only");
    (parameter == "D1" ? out.rate : out.rate_secondary) = value;
  } else if (parameter == "d") {
    if (!(value > 0.0)) throw DomainError("defect offset must be positive");
    for (auto& [site, offset] : out.chain.defects) offset = value;
  } else if (parameter == "Delta") {
    out.chain.anisotropy = value;
  } else if (parameter == "mu") {
    if (base.kind != ProtocolKind::bell) throw DomainError("mu applies to the bell protocol only");
    const int mu = static_cast<int>(std::lround(value));
    if (mu < 0 || std::abs(value - mu) > 1e-12) throw DomainError("mu must be a non-negative integer");
    const int L = base.chain.sites;
    const int n1 = wrap_site(base.defect_sites.at(0), L);
    const int old_n2 = wrap_site(base.defect_sites.at(1), L);
    const double d = base.chain.defect_offset(n1);
    const int n2 = wrap_site(n1 + mu + 1, L);
    if (n2 == n1) throw DomainError("mu too large for the chain");
    out.chain.defects.erase(old_n2);
    out.chain.defects[n2] = d;
    out.defect_sites = {n1, n2};
  } else {
    std::string allowed;
    for (const auto& p : sweep_parameters()) allowed += (allowed.empty() ? "" : ", ") + p;
    throw DomainError("unknown sweep parameter '" + parameter + "' (allowed: " + allowed + ")");
  }
  return out;
}

std::vector<SweepRow> sweep(const ProtocolSpec& base, const std::string& parameter,
                            const std::vector<double>& values, unsigned jobs) {
  std::vector<ProtocolSpec> specs;
  for (double v : values) specs.push_back(with_parameter(base, parameter, v));
  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        rows[i] = SweepRow{values[i], run_protocol(specs[i])};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(specs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace defectchain
