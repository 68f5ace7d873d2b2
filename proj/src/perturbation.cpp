#include "defectchain/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "defectchain/errors.hpp"

namespace defectchain {

namespace {

constexpr double kPi = std::numbers::pi;

double common_offset(const ChainSpec& spec, std::initializer_list<int> sites) {
  double d = -1.0;
  for (int s : sites) {
    const double offset = spec.defect_offset(s);
    if (offset == 0.0) throw DomainError("site " + std::to_string(s) + " carries no defect");
    if (d >= 0.0 && std::abs(offset - d) > 1e-12 * std::max(1.0, d)) {
      throw DomainError("defects carry unequal offsets");
    }
    d = offset;
  }
  return d;
}

/// Places `values` (given per site order) into basis order.
Eigen::VectorXd in_basis_order(const SectorBasis& basis, const std::vector<Configuration>& order,
                               const std::vector<double>& values) {
  Eigen::VectorXd v(basis.size());
  for (std::size_t k = 0; k < order.size(); ++k) v(basis.index_of(order[k])) = values[k];
  return v;
}

void finish_warnings(EffectiveModel& m, const ChainSpec& spec) {
  for (auto& w : spec.regime_warnings()) m.warnings.push_back(std::move(w));
}

}  // namespace

EffectiveModel two_defect_model(const ChainSpec& spec, int n1, int n2) {
  spec.validate();
  const int L = spec.sites;
  if (wrap_site(n1, L) == wrap_site(n2, L)) throw DomainError("two-defect model needs two sites");
  const double d = common_offset(spec, {n1, n2});
  const double J = spec.hopping;
  const double E1 = spec.single_excitation_energy();
  const int mu = site_distance(n1, n2, L, spec.boundary) - 1;

  EffectiveModel m;
  m.kind = ModelKind::two_defect;
  m.sites = {wrap_site(n1, L), wrap_site(n2, L)};
  double diag = E1 + d;
  if (mu == 0) {
    m.coupling = J / 2.0;
    m.order = 1;
  } else if (mu == 1) {
    diag += J * J / (2.0 * d);
    m.coupling = J * J / (4.0 * d);
    m.order = 2;
  } else {
    m.coupling = (J / 2.0) * std::pow(J / (2.0 * d), mu);
    m.order = mu + 1;
    m.extrapolated = true;
    m.warnings.push_back("effective hopping for separation mu >= 2 is extrapolated");
  }
  if (d <= 5.0 * J) m.warnings.push_back("defect offset d <= 5J: perturbative treatment is marginal");
  finish_warnings(m, spec);

  const std::vector<Configuration> order{Configuration::from_sites({n1}, L),
                                         Configuration::from_sites({n2}, L)};
  m.basis = SectorBasis::from_configurations(L, order);
  m.matrix = Eigen::MatrixXd::Constant(2, 2, m.coupling);
  m.matrix.diagonal().setConstant(diag);
  m.energies = Eigen::Vector2d(diag - m.coupling, diag + m.coupling);
  const double r = 1.0 / std::sqrt(2.0);
  m.vectors.resize(2, 2);
  m.vectors.col(0) = in_basis_order(*m.basis, order, {r, -r});
  m.vectors.col(1) = in_basis_order(*m.basis, order, {r, r});
  m.frequency = 2.0 * m.coupling;
  return m;
}

EffectiveModel three_defect_model(const ChainSpec& spec, int n1) {
  spec.validate();
  const int L = spec.sites;
  if (L < 3) throw DomainError("three-defect model needs at least three sites");
  const double d = common_offset(spec, {n1, n1 + 1, n1 + 2});
  const double J = spec.hopping;
  const double E = spec.single_excitation_energy() + d;

  EffectiveModel m;
  m.kind = ModelKind::three_defect;
  m.sites = {wrap_site(n1, L), wrap_site(n1 + 1, L), wrap_site(n1 + 2, L)};
  m.coupling = J / 2.0;
  m.order = 1;
  if (d <= 5.0 * J) m.warnings.push_back("defect offset d <= 5J: perturbative treatment is marginal");
  finish_warnings(m, spec);

  const std::vector<Configuration> order{Configuration::from_sites({n1}, L),
                                         Configuration::from_sites({n1 + 1}, L),
                                         Configuration::from_sites({n1 + 2}, L)};
  m.basis = SectorBasis::from_configurations(L, order);
  std::array<std::size_t, 3> idx{};
  for (std::size_t k = 0; k < 3; ++k) idx[k] = m.basis->index_of(order[k]);
  m.matrix = Eigen::MatrixXd::Zero(3, 3);
  for (std::size_t k = 0; k < 3; ++k) m.matrix(idx[k], idx[k]) = E;
  for (std::size_t k = 0; k < 2; ++k) {
    m.matrix(idx[k], idx[k + 1]) = J / 2.0;
    m.matrix(idx[k + 1], idx[k]) = J / 2.0;
  }
  const double s2 = std::sqrt(2.0);
  m.energies = Eigen::Vector3d(E - J / s2, E, E + J / s2);
  m.vectors.resize(3, 3);
  m.vectors.col(0) = in_basis_order(*m.basis, order, {0.5, -s2 / 2.0, 0.5});   // psi_c
  m.vectors.col(1) = in_basis_order(*m.basis, order, {-1.0 / s2, 0.0, 1.0 / s2});  // psi_b
  m.vectors.col(2) = in_basis_order(*m.basis, order, {0.5, s2 / 2.0, 0.5});    // psi_a
  m.frequency = s2 * J;
  return m;
}

EffectiveModel bound_pair_model(const ChainSpec& spec, int n1) {
  spec.validate();
  const int L = spec.sites;
  if (L < 4) throw DomainError("bound-pair model needs at least four sites");
  if (spec.defects.size() != 1 || spec.defect_offset(n1) == 0.0) {
    throw DomainError("bound-pair model needs exactly one defect, located at n1");
  }
  if (!(spec.anisotropy > 0.0)) throw DomainError("bound-pair model needs Delta > 0");
  const double d = spec.defect_offset(n1);
  const double J = spec.hopping;
  const double JD = J * spec.anisotropy;
  const double E1 = spec.single_excitation_energy();

  EffectiveModel m;
  m.kind = ModelKind::bound_pair;
  m.sites = {wrap_site(n1, L)};
  m.coupling = J * J / (4.0 * (JD + d));
  m.order = 2;
  if (JD <= 2.0 * d) m.warnings.push_back("J*Delta is not much larger than d");
  if (d <= 5.0 * J) m.warnings.push_back("defect offset d <= 5J: perturbative treatment is marginal");
  finish_warnings(m, spec);

  const std::vector<Configuration> order{Configuration::from_sites({n1 - 1, n1}, L),
                                         Configuration::from_sites({n1, n1 + 1}, L)};
  m.basis = SectorBasis::from_configurations(L, order);
  const double diag = 2.0 * E1 + d + JD + J / (4.0 * spec.anisotropy) + m.coupling;
  m.matrix = Eigen::MatrixXd::Constant(2, 2, m.coupling);
  m.matrix.diagonal().setConstant(diag);
  m.energies = Eigen::Vector2d(diag - m.coupling, diag + m.coupling);
  const double r = 1.0 / std::sqrt(2.0);
  m.vectors.resize(2, 2);
  m.vectors.col(0) = in_basis_order(*m.basis, order, {r, -r});
  m.vectors.col(1) = in_basis_order(*m.basis, order, {r, r});
  m.frequency = 2.0 * m.coupling;
  return m;
}

double oscillation_period(double hopping, double offset, int mu) {
  if (mu < 0) throw DomainError("separation mu must be non-negative");
  if (!(offset > 0.0) || !(hopping > 0.0)) throw DomainError("J and d must be positive");
  return (2.0 * kPi / hopping) * std::pow(2.0 * offset / hopping, mu);
}

double oscillation_period(const ChainSpec& spec, int mu) {
  std::set<double> offsets;
  for (const auto& [site, d] : spec.defects) offsets.insert(d);
  if (offsets.size() != 1) throw DomainError("period law needs defects with one common offset");
  return oscillation_period(spec.hopping, *offsets.begin(), mu);
}

double two_level_return_probability(const EffectiveModel& model, double t) {
  return 0.5 * (1.0 + std::cos(model.frequency * t));
}

std::array<double, 3> three_level_probabilities(const EffectiveModel& model, double t) {
  if (model.kind != ModelKind::three_defect) throw DomainError("needs a three-defect model");
  const double c = std::cos(model.frequency * t);
  return {0.25 * (1.0 - c), 0.5 * (1.0 + c), 0.25 * (1.0 - c)};
}

std::vector<double> bell_times(const EffectiveModel& model, int k_max) {
  if (model.energies.size() != 2) throw DomainError("Bell times need a two-level model");
  std::vector<double> out;
  for (int k = 1; k <= k_max; k += 2) out.push_back(kPi * k / (2.0 * model.frequency));
  return out;
}

std::vector<double> half_crossing_times(const EffectiveModel& model, std::size_t count) {
  std::vector<double> out;
  for (std::size_t m = 0; m < count; ++m) {
    out.push_back((kPi / 2.0 + kPi * static_cast<double>(m)) / model.frequency);
  }
  return out;
}

std::vector<double> w_times(const EffectiveModel& model, int k_max) {
  if (model.kind != ModelKind::three_defect) throw DomainError("W times need a three-defect model");
  const double a = std::acos(-1.0 / 3.0);
  std::vector<double> out;
  for (int k = 0; k <= k_max; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const int floor_half = k / 2;  // k >= 0
    out.push_back((sign * a + 2.0 * kPi * (k - floor_half)) / model.frequency);
  }
  return out;
}

std::vector<double> w_crossing_times(const EffectiveModel& model, std::size_t count) {
  if (model.kind != ModelKind::three_defect) throw DomainError("W times need a three-defect model");
  const double a = std::acos(-1.0 / 3.0);
  std::vector<double> phases;
  for (std::size_t m = 0; phases.size() < count + 2; ++m) {
    phases.push_back(a + 2.0 * kPi * m);
    phases.push_back(2.0 * kPi - a + 2.0 * kPi * m);
  }
  std::sort(phases.begin(), phases.end());
  phases.resize(count);
  for (double& p : phases) p /= model.frequency;
  return phases;
}

std::vector<double> bound_pair_times(const EffectiveModel& model, int k_max) {
  if (model.kind != ModelKind::bound_pair) throw DomainError("needs a bound-pair model");
  // 2 (J Delta + d) / J^2 is 1 / (E+ - E-).
  const double scale = 1.0 / model.frequency;
  std::vector<double> out;
  for (int k = 1; k <= k_max; k += 2) out.push_back(scale * (kPi / 2.0 + k * kPi));
  return out;
}

std::vector<BandPrediction> band_layout(const ChainSpec& spec, int excitations) {
  spec.validate();
  if (spec.boundary != Boundary::periodic) throw DomainError("band layout assumes a periodic chain");
  const double J = spec.hopping;
  const double E1 = spec.single_excitation_energy();
  const int L = spec.sites;

  if (excitations == 1) {
    std::vector<BandPrediction> out;
    out.push_back({"bulk", E1, J, static_cast<std::size_t>(L) - spec.defects.size()});
    std::set<double> offsets;
    for (const auto& [site, d] : spec.defects) offsets.insert(d);
    for (double d : offsets) {
      std::size_t count = 0;
      bool clustered = false;
      for (const auto& [site, dd] : spec.defects) {
        if (dd != d) continue;
        ++count;
        const auto next = spec.defects.find(wrap_site(site + 1, L));
        if (next != spec.defects.end() && next->second == d && next->first != site) clustered = true;
      }
      out.push_back({"defect(d=" + std::to_string(d) + ")", E1 + d, clustered ? J : 0.0, count});
    }
    return out;
  }
  if (excitations != 2) throw DomainError("band layout supports N = 1 or N = 2 only");
  if (!(spec.anisotropy > 0.0)) throw DomainError("two-excitation bands need Delta > 0");
  if (spec.defects.size() > 1) throw DomainError("two-excitation bands support at most one defect");

  const double JD = J * spec.anisotropy;
  const int defect_site = spec.defects.empty() ? 0 : spec.defects.begin()->first;
  const double d = spec.defects.empty() ? 0.0 : spec.defects.begin()->second;

  std::size_t free = 0, trapped = 0, bound = 0, defect_pair = 0;
  const BasisPtr pairs = SectorBasis::enumerate(L, 2);
  for (const auto& c : pairs->states()) {
    const auto s = c.sites();
    const bool adjacent = site_distance(s[0], s[1], L, spec.boundary) == 1;
    const bool on_defect = defect_site != 0 && c.excited(defect_site);
    if (adjacent) {
      (on_defect ? defect_pair : bound) += 1;
    } else {
      (on_defect ? trapped : free) += 1;
    }
  }
  std::vector<BandPrediction> out;
  out.push_back({"free", 2.0 * E1, 2.0 * J, free});
  if (defect_site != 0) out.push_back({"trapped", 2.0 * E1 + d, 2.0 * J, trapped});
  const double narrow = J / (2.0 * spec.anisotropy);
  out.push_back({"bound_pair", 2.0 * E1 + JD + narrow, narrow, bound});
  if (defect_site != 0) {
    const double g = J * J / (4.0 * (JD + d));
    out.push_back({"defect_pair", 2.0 * E1 + d + JD + J / (4.0 * spec.anisotropy) + g, g,
                   defect_pair});
  }
  return out;
}

double band_tolerance(const ChainSpec& spec) {
  double d = 0.0;
  for (const auto& [site, offset] : spec.defects) d = std::max(d, offset);
  const double J = spec.hopping;
  const double denom = J * spec.anisotropy + d;
  const double floor = 1e-9 * J;
  return denom > 0.0 ? std::max(3.0 * J * J / denom, floor) : floor;
}

BandAssignment assign_bands(const Eigen::VectorXd& eigenvalues,
                            const std::vector<BandPrediction>& bands, double tolerance) {
  BandAssignment out;
  out.bands.resize(bands.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double e = eigenvalues(i);
    int hit = -1;
    int hits = 0;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (std::abs(e - bands[b].center) <= bands[b].half_width + tolerance) {
        hit = static_cast<int>(b);
        ++hits;
      }
    }
    if (hits == 0) {
      ++out.unassigned;
      out.band_of.push_back(-1);
      continue;
    }
    if (hits > 1) {
      ++out.ambiguous;
      out.band_of.push_back(-1);
      continue;
    }
    out.band_of.push_back(hit);
    BandMembership& m = out.bands[hit];
    if (m.members == 0) {
      m.lowest = m.highest = e;
    } else {
      m.lowest = std::min(m.lowest, e);
      m.highest = std::max(m.highest, e);
    }
    ++m.members;
    m.max_deviation = std::max(m.max_deviation, std::abs(e - bands[hit].center));
  }
  return out;
}

}  // namespace defectchain
