#include "defectchain/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "defectchain/errors.hpp"

namespace defectchain {

void ChainSpec::validate() const {
  if (sites < 2 || sites > kMaxSites) {
    throw DomainError("chain length must lie in [2, " + std::to_string(kMaxSites) + "]");
  }
  if (!(hopping > 0.0)) throw DomainError("hopping J must be positive");
  if (!(anisotropy >= 0.0)) throw DomainError("anisotropy Delta must be non-negative");
  if (!std::isfinite(level_spacing)) throw DomainError("level spacing must be finite");
  for (const auto& [site, offset] : defects) {
    if (site < 1 || site > sites) {
      throw DomainError("defect site " + std::to_string(site) + " outside 1.." +
                        std::to_string(sites));
    }
    if (!(offset > 0.0) || !std::isfinite(offset)) {
      throw DomainError("defect offset at site " + std::to_string(site) + " must be positive");
    }
  }
}

std::vector<std::string> ChainSpec::regime_warnings() const {
  std::vector<std::string> out;
  double largest = std::max(hopping, hopping * anisotropy);
  for (const auto& [site, offset] : defects) largest = std::max(largest, offset);
  if (level_spacing < 10.0 * largest) {
    out.push_back("level spacing epsilon is not much larger than J, J*Delta and d_n; "
                  "the all-down state may not be the ground state");
  }
  return out;
}

double ChainSpec::defect_offset(int site) const {
  const auto it = defects.find(wrap_site(site, sites));
  return it == defects.end() ? 0.0 : it->second;
}

double ChainSpec::site_level(int site) const { return level_spacing + defect_offset(site); }

double ChainSpec::ground_state_energy() const {
  double e = 0.0;
  for (int n = 1; n <= sites; ++n) e -= site_level(n) / 2.0;
  const int bonds = boundary == Boundary::periodic ? sites : sites - 1;
  return e + bonds * hopping * anisotropy / 4.0;
}

double SiteDetuning::offset_at(double t) const noexcept {
  if (t < start) return 0.0;
  const double dt = t - start;
  switch (shape) {
    case DetuningShape::linear: return rate * dt;
    case DetuningShape::quadratic: return rate * dt * dt;
    case DetuningShape::none: break;
  }
  return 0.0;
}

void validate_schedule(const DetuningSchedule& schedule, int chain_sites) {
  for (const auto& entry : schedule) {
    if (entry.site < 1 || entry.site > chain_sites) {
      throw DomainError("detuned site " + std::to_string(entry.site) + " outside chain");
    }
    if (!(entry.rate >= 0.0)) throw DomainError("detuning rate must be non-negative");
  }
}

namespace {

SectorMatrix assemble(const ChainSpec& spec, BasisPtr basis, EnergyReference reference) {
  const std::size_t dim = basis->size();
  const int L = spec.sites;
  const double J = spec.hopping;
  const int bonds = spec.boundary == Boundary::periodic ? L : L - 1;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const Configuration& c = (*basis)[i];
    double diag = 0.0;
    for (int n : c.sites()) diag += spec.site_level(n);
    diag -= 0.5 * J * spec.anisotropy * c.anti_aligned_bonds(spec.boundary);
    h(i, i) = diag;

    // Hops are accumulated per bond, so the doubled bond of an L = 2 ring
    // contributes twice, as the operator sum does.
    const std::uint32_t bits = c.bits();
    for (int n = 0; n < bonds; ++n) {
      const int m = (n + 1) % L;
      if (((bits >> n) & 1u) == ((bits >> m) & 1u)) continue;
      const Configuration target(bits ^ (1u << n) ^ (1u << m), L);
      if (auto j = basis->find(target)) h(i, *j) += 0.5 * J;
    }
  }
  if (reference == EnergyReference::raw) {
    h.diagonal().array() += spec.ground_state_energy();
  }
  return SectorMatrix{std::move(basis), std::move(h)};
}

}  // namespace

SectorMatrix build_static(const ChainSpec& spec, int excitations, EnergyReference reference) {
  spec.validate();
  return assemble(spec, SectorBasis::enumerate(spec.sites, excitations), reference);
}

Eigen::VectorXd detuning_diagonal(const SectorBasis& basis, const DetuningSchedule& schedule,
                                  double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
  for (const auto& entry : schedule) {
    const double delta = entry.offset_at(t);
    if (delta == 0.0) continue;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (basis[i].excited(entry.site)) out(i) += delta;
    }
  }
  return out;
}

SectorMatrix build_at_time(const ChainSpec& spec, const DetuningSchedule& schedule,
                           int excitations, double t) {
  if (t < 0.0) throw DomainError("time must be non-negative");
  validate_schedule(schedule, spec.sites);
  SectorMatrix m = build_static(spec, excitations);
  m.entries.diagonal() += detuning_diagonal(*m.basis, schedule, t);
  return m;
}

SectorMatrix defect_block(const ChainSpec& spec, std::span<const int> defect_sites) {
  spec.validate();
  if (defect_sites.empty()) throw DomainError("defect block needs at least one site");
  const double d = spec.defect_offset(defect_sites.front());
  std::vector<Configuration> configs;
  for (int s : defect_sites) {
    const double offset = spec.defect_offset(s);
    if (offset == 0.0) throw DomainError("site " + std::to_string(s) + " is not a defect");
    if (std::abs(offset - d) > 1e-12 * std::max(1.0, std::abs(d))) {
      throw DomainError("defect block sites carry unequal offsets");
    }
    configs.push_back(Configuration::from_sites({s}, spec.sites));
  }
  return assemble(spec, SectorBasis::from_configurations(spec.sites, std::move(configs)),
                  EnergyReference::ground_state);
}

}  // namespace defectchain
