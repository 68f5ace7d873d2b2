#include "defectchain/basis.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <string>

#include "defectchain/errors.hpp"

namespace defectchain {

namespace {

void check_chain_sites(int chain_sites) {
  if (chain_sites < 2 || chain_sites > kMaxSites) {
    throw DomainError("chain length must lie in [2, " + std::to_string(kMaxSites) +
                      "], got " + std::to_string(chain_sites));
  }
}

}  // namespace

int wrap_site(int site, int chain_sites) noexcept {
  const int r = ((site - 1) % chain_sites + chain_sites) % chain_sites;
  return r + 1;
}

int site_distance(int a, int b, int chain_sites, Boundary boundary) noexcept {
  const int d = std::abs(wrap_site(a, chain_sites) - wrap_site(b, chain_sites));
  return boundary == Boundary::periodic ? std::min(d, chain_sites - d) : d;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

Configuration::Configuration(std::uint32_t bits, int sites) : bits_(bits), sites_(sites) {
  check_chain_sites(sites);
  if (sites < 32 && (bits >> sites) != 0) {
    throw DomainError("configuration has bits beyond site " + std::to_string(sites));
  }
}

Configuration Configuration::from_sites(std::span<const int> sites, int chain_sites) {
  check_chain_sites(chain_sites);
  std::uint32_t bits = 0;
  for (int s : sites) {
    const std::uint32_t bit = 1u << (wrap_site(s, chain_sites) - 1);
    if (bits & bit) {
      throw DomainError("site label " + std::to_string(s) + " duplicates another site modulo " +
                        std::to_string(chain_sites));
    }
    bits |= bit;
  }
  return Configuration(bits, chain_sites);
}

int Configuration::excitations() const noexcept { return std::popcount(bits_); }

bool Configuration::excited(int site) const noexcept {
  return (bits_ >> (wrap_site(site, sites_) - 1)) & 1u;
}

std::vector<int> Configuration::sites() const {
  std::vector<int> out;
  for (int n = 0; n < sites_; ++n)
    if ((bits_ >> n) & 1u) out.push_back(n + 1);
  return out;
}

int Configuration::anti_aligned_bonds(Boundary boundary) const noexcept {
  const int bonds = boundary == Boundary::periodic ? sites_ : sites_ - 1;
  int count = 0;
  for (int n = 0; n < bonds; ++n) {
    const int m = (n + 1) % sites_;
    count += ((bits_ >> n) & 1u) != ((bits_ >> m) & 1u);
  }
  return count;
}

std::vector<Configuration> Configuration::hop_neighbors(Boundary boundary) const {
  std::vector<Configuration> out;
  const int bonds = boundary == Boundary::periodic ? sites_ : sites_ - 1;
  // L = 2 periodic has both bonds joining the same pair; count it once.
  const int distinct_bonds = (sites_ == 2) ? 1 : bonds;
  for (int n = 0; n < distinct_bonds; ++n) {
    const int m = (n + 1) % sites_;
    if (((bits_ >> n) & 1u) != ((bits_ >> m) & 1u)) {
      out.emplace_back(bits_ ^ (1u << n) ^ (1u << m), sites_);
    }
  }
  return out;
}

SectorBasis::SectorBasis(int chain_sites, int excitations, std::vector<Configuration> states)
    : sites_(chain_sites), excitations_(excitations), states_(std::move(states)) {}

std::shared_ptr<const SectorBasis> SectorBasis::enumerate(int chain_sites, int excitations) {
  check_chain_sites(chain_sites);
  if (excitations < 0 || excitations > chain_sites) {
    throw DomainError("excitation count " + std::to_string(excitations) + " outside [0, " +
                      std::to_string(chain_sites) + "]");
  }
  const std::uint64_t dim = binomial(chain_sites, excitations);
  if (dim > kMaxSectorDimension) {
    throw DomainError("sector dimension " + std::to_string(dim) + " exceeds the dense limit " +
                      std::to_string(kMaxSectorDimension));
  }
  std::vector<Configuration> states;
  states.reserve(dim);
  // Gosper's hack walks fixed-popcount masks in ascending order.
  if (excitations == 0) {
    states.emplace_back(0u, chain_sites);
  } else {
    const std::uint64_t limit = std::uint64_t{1} << chain_sites;
    std::uint64_t v = (std::uint64_t{1} << excitations) - 1;
    while (v < limit) {
      states.emplace_back(static_cast<std::uint32_t>(v), chain_sites);
      const std::uint64_t t = v | (v - 1);
      v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
  }
  return std::shared_ptr<const SectorBasis>(
      new SectorBasis(chain_sites, excitations, std::move(states)));
}

std::shared_ptr<const SectorBasis> SectorBasis::from_configurations(
    int chain_sites, std::vector<Configuration> configurations) {
  check_chain_sites(chain_sites);
  if (configurations.empty()) throw DomainError("sub-basis needs at least one configuration");
  const int n = configurations.front().excitations();
  for (const auto& c : configurations) {
    if (c.chain_sites() != chain_sites) throw DomainError("configuration chain length mismatch");
    if (c.excitations() != n) throw DomainError("sub-basis mixes excitation numbers");
  }
  std::sort(configurations.begin(), configurations.end());
  if (std::adjacent_find(configurations.begin(), configurations.end()) != configurations.end()) {
    throw DomainError("sub-basis contains a repeated configuration");
  }
  return std::shared_ptr<const SectorBasis>(
      new SectorBasis(chain_sites, n, std::move(configurations)));
}

std::optional<std::size_t> SectorBasis::find(const Configuration& c) const {
  if (c.chain_sites() != sites_) return std::nullopt;
  const auto it = std::lower_bound(states_.begin(), states_.end(), c);
  if (it == states_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t SectorBasis::index_of(const Configuration& c) const {
  if (auto i = find(c)) return *i;
  throw DomainError("configuration not present in basis");
}

bool SectorBasis::same_as(const SectorBasis& other) const noexcept {
  return this == &other || (sites_ == other.sites_ && states_ == other.states_);
}

}  // namespace defectchain
