#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace defectchain {

/// Largest chain handled by the dense sector machinery. Configuration
/// constant, raise it together with kMaxSectorDimension if needed.
inline constexpr int kMaxSites = 24;

/// Largest sector (number of configurations) that may be enumerated.
inline constexpr std::size_t kMaxSectorDimension = 8000;

enum class Boundary { periodic, open };

/// Occupation pattern of an L-site chain. Bit (n-1) set means site n is
/// excited (spin up). Public site labels are 1-based and reduced cyclically,
/// so site n+L names the same site as n.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::uint32_t bits, int sites);

  /// Build from 1-based site labels. Labels are reduced modulo L; a label
  /// repeated after reduction is a DomainError.
  static Configuration from_sites(std::span<const int> sites, int chain_sites);
  static Configuration from_sites(std::initializer_list<int> sites, int chain_sites) {
    return from_sites(std::span<const int>(sites.begin(), sites.size()), chain_sites);
  }

  std::uint32_t bits() const noexcept { return bits_; }
  int chain_sites() const noexcept { return sites_; }
  int excitations() const noexcept;
  bool excited(int site) const noexcept;
  /// Ascending 1-based labels of the excited sites.
  std::vector<int> sites() const;

  /// Number of bonds whose two spins differ. Open chains skip the L-1 bond.
  int anti_aligned_bonds(Boundary boundary) const noexcept;

  /// Every configuration reachable by moving one excitation to an empty
  /// nearest-neighbor site.
  std::vector<Configuration> hop_neighbors(Boundary boundary) const;

  friend auto operator<=>(const Configuration&, const Configuration&) = default;

 private:
  std::uint32_t bits_ = 0;
  int sites_ = 0;
};

/// Reduce a possibly out-of-range label to 1..L.
int wrap_site(int site, int chain_sites) noexcept;

/// Shortest distance between two sites, counted along the chain.
int site_distance(int a, int b, int chain_sites, Boundary boundary) noexcept;

/// Ordered set of same-excitation-number configurations with inverse index.
/// Ordering is ascending bitmask value. Immutable once built.
class SectorBasis {
 public:
  /// All binomial(L, N) configurations with N excitations.
  static std::shared_ptr<const SectorBasis> enumerate(int chain_sites, int excitations);

  /// A sub-basis spanned by selected configurations (used for effective
  /// few-level models). All entries must share L and excitation count.
  static std::shared_ptr<const SectorBasis> from_configurations(
      int chain_sites, std::vector<Configuration> configurations);

  int chain_sites() const noexcept { return sites_; }
  int excitations() const noexcept { return excitations_; }
  std::size_t size() const noexcept { return states_.size(); }
  const Configuration& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<Configuration>& states() const noexcept { return states_; }

  std::optional<std::size_t> find(const Configuration& c) const;
  /// Ordinal of `c`; DomainError when absent.
  std::size_t index_of(const Configuration& c) const;

  bool same_as(const SectorBasis& other) const noexcept;

 private:
  SectorBasis(int chain_sites, int excitations, std::vector<Configuration> states);

  int sites_;
  int excitations_;
  std::vector<Configuration> states_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

std::uint64_t binomial(int n, int k);

}  // namespace defectchain
